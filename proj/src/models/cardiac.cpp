#include "gsm/cardiac.hpp"

#include "cardiac_text.hpp"

namespace gsm {

std::string_view cardiac_pack_source() { return embedded::kCardiacPack; }

std::string_view cardiac_properties() { return embedded::kCardiacProperties; }

std::shared_ptr<const CompiledPack> load_cardiac_pack() {
  static const std::shared_ptr<const CompiledPack> pack = std::make_shared<CompiledPack>(compile_source(cardiac_pack_source()));
  return pack;
}

}  // namespace gsm
