#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gsm {

/// Milliseconds since session start.
using Millis = std::int64_t;

enum class ValueType { Int, Decimal, Enum };

std::string_view to_string(ValueType type);

/// Fixed-point decimal with six fractional digits. Physiological
/// thresholds (pH 7.35, creatinine 1.5) need exact comparisons, so
/// decimals never pass through binary floating point.
class Decimal {
 public:
  static constexpr std::int64_t kScale = 1'000'000;

  constexpr Decimal() = default;
  static constexpr Decimal from_micros(std::int64_t micros) {
    Decimal d;
    d.micros_ = micros;
    return d;
  }
  static constexpr Decimal from_int(std::int64_t v) { return from_micros(v * kScale); }
  static Decimal from_double(double v);
  /// Accepts `[-]digits[.digits]` with at most six fractional digits.
  static std::optional<Decimal> parse(std::string_view text);

  constexpr std::int64_t micros() const { return micros_; }
  double to_double() const { return static_cast<double>(micros_) / kScale; }
  /// Shortest form that still reads back as a decimal ("7.35", "7.0").
  std::string str() const;

  friend constexpr auto operator<=>(Decimal, Decimal) = default;
  friend constexpr Decimal operator+(Decimal a, Decimal b) { return from_micros(a.micros_ + b.micros_); }

 private:
  std::int64_t micros_ = 0;
};

/// A typed scalar: integer, decimal or enum literal.
class Value {
 public:
  Value() = default;
  static Value integer(std::int64_t v);
  static Value decimal(Decimal v);
  static Value enumerator(std::string literal);

  ValueType type() const { return type_; }
  bool is_numeric() const { return type_ != ValueType::Enum; }
  std::int64_t as_int() const;
  Decimal as_decimal() const;
  const std::string& as_enum() const;
  /// Integers promoted to decimal.
  Decimal numeric() const;

  /// Source-literal form: `20`, `7.35`, `VFIB`.
  std::string str() const;

  /// Structural equality: type and payload.
  friend bool operator==(const Value&, const Value&) = default;

 private:
  ValueType type_ = ValueType::Int;
  std::int64_t num_ = 0;
  std::string text_;
};

/// Ordering used by guard evaluation. Numbers compare across int/decimal;
/// enums compare only for (in)equality.
std::partial_ordering compare_values(const Value& a, const Value& b);

/// Named values: a measurement snapshot, a parameter table or automaton locals.
using Valuation = std::map<std::string, Value, std::less<>>;

struct NumericRange {
  Value lo;
  Value hi;
  Value step;
  friend bool operator==(const NumericRange&, const NumericRange&) = default;
};

/// Declared type of an input, parameter or local variable.
struct TypeSpec {
  ValueType kind = ValueType::Int;
  std::vector<std::string> literals;  // enum only
  std::optional<NumericRange> range;  // numeric only, optional

  static TypeSpec integer() { return {ValueType::Int, {}, std::nullopt}; }
  static TypeSpec decimal() { return {ValueType::Decimal, {}, std::nullopt}; }
  static TypeSpec enumeration(std::vector<std::string> literals) {
    return {ValueType::Enum, std::move(literals), std::nullopt};
  }

  bool has_literal(std::string_view name) const;
  /// True when `v` can be stored in a variable of this type (ints widen to decimal).
  bool admits(const Value& v) const;
  /// Converts an admitted value to this type's representation.
  Value coerce(const Value& v) const;
  /// Finite domain: enum literals, or lo, lo+step, ..., <= hi. Empty when
  /// a numeric type has no declared range.
  std::vector<Value> domain() const;

  friend bool operator==(const TypeSpec&, const TypeSpec&) = default;
};

}  // namespace gsm
