#pragma once

#include <memory>
#include <string_view>

#include "gsm/compile.hpp"

namespace gsm {

/// Source of the shipped cardiac arrest pack and its property file, as
/// built into the library.
std::string_view cardiac_pack_source();
std::string_view cardiac_properties();

/// Parses, validates, lowers and derives the physician twins. Throws
/// CompileError if the built-in source is broken.
std::shared_ptr<const CompiledPack> load_cardiac_pack();

}  // namespace gsm
