#include "gsm/value.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gsm {

std::string_view to_string(ValueType type) {
  switch (type) {
    case ValueType::Int: return "int";
    case ValueType::Decimal: return "decimal";
    case ValueType::Enum: return "enum";
  }
  return "?";
}

Decimal Decimal::from_double(double v) {
  return from_micros(static_cast<std::int64_t>(std::llround(v * static_cast<double>(kScale))));
}

std::optional<Decimal> Decimal::parse(std::string_view text) {
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  if (text.empty()) return std::nullopt;
  std::int64_t whole = 0;
  std::size_t i = 0;
  bool any_digit = false;
  for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i) {
    whole = whole * 10 + (text[i] - '0');
    any_digit = true;
    if (whole > 9'000'000'000'000) return std::nullopt;
  }
  std::int64_t frac = 0;
  int frac_digits = 0;
  if (i < text.size() && text[i] == '.') {
    ++i;
    for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i) {
      if (++frac_digits > 6) return std::nullopt;
      frac = frac * 10 + (text[i] - '0');
      any_digit = true;
    }
  }
  if (i != text.size() || !any_digit) return std::nullopt;
  for (int k = frac_digits; k < 6; ++k) frac *= 10;
  const std::int64_t micros = whole * kScale + frac;
  return from_micros(negative ? -micros : micros);
}

std::string Decimal::str() const {
  const std::int64_t abs = micros_ < 0 ? -micros_ : micros_;
  std::string out = micros_ < 0 ? "-" : "";
  out += std::to_string(abs / kScale);
  std::string frac = std::to_string(abs % kScale);
  frac.insert(0, 6 - frac.size(), '0');
  while (frac.size() > 1 && frac.back() == '0') frac.pop_back();
  out += '.';
  out += frac;
  return out;
}

Value Value::integer(std::int64_t v) {
  Value out;
  out.type_ = ValueType::Int;
  out.num_ = v;
  return out;
}

Value Value::decimal(Decimal v) {
  Value out;
  out.type_ = ValueType::Decimal;
  out.num_ = v.micros();
  return out;
}

Value Value::enumerator(std::string literal) {
  Value out;
  out.type_ = ValueType::Enum;
  out.text_ = std::move(literal);
  return out;
}

std::int64_t Value::as_int() const {
  if (type_ != ValueType::Int) throw std::logic_error("value is not an int");
  return num_;
}

Decimal Value::as_decimal() const {
  if (type_ != ValueType::Decimal) throw std::logic_error("value is not a decimal");
  return Decimal::from_micros(num_);
}

const std::string& Value::as_enum() const {
  if (type_ != ValueType::Enum) throw std::logic_error("value is not an enum literal");
  return text_;
}

Decimal Value::numeric() const {
  switch (type_) {
    case ValueType::Int: return Decimal::from_int(num_);
    case ValueType::Decimal: return Decimal::from_micros(num_);
    case ValueType::Enum: break;
  }
  throw std::logic_error("enum literal has no numeric value");
}

std::string Value::str() const {
  switch (type_) {
    case ValueType::Int: return std::to_string(num_);
    case ValueType::Decimal: return Decimal::from_micros(num_).str();
    case ValueType::Enum: return text_;
  }
  return {};
}

std::partial_ordering compare_values(const Value& a, const Value& b) {
  if (a.is_numeric() && b.is_numeric()) return a.numeric() <=> b.numeric();
  if (a.type() == ValueType::Enum && b.type() == ValueType::Enum) {
    return a.as_enum() == b.as_enum() ? std::partial_ordering::equivalent
                                      : std::partial_ordering::unordered;
  }
  return std::partial_ordering::unordered;
}

bool TypeSpec::has_literal(std::string_view name) const {
  return std::find(literals.begin(), literals.end(), name) != literals.end();
}

bool TypeSpec::admits(const Value& v) const {
  switch (kind) {
    case ValueType::Int: return v.type() == ValueType::Int;
    case ValueType::Decimal: return v.is_numeric();
    case ValueType::Enum: return v.type() == ValueType::Enum && has_literal(v.as_enum());
  }
  return false;
}

Value TypeSpec::coerce(const Value& v) const {
  if (kind == ValueType::Decimal && v.type() == ValueType::Int) return Value::decimal(v.numeric());
  return v;
}

std::vector<Value> TypeSpec::domain() const {
  std::vector<Value> out;
  if (kind == ValueType::Enum) {
    for (const auto& lit : literals) out.push_back(Value::enumerator(lit));
    return out;
  }
  if (!range) return out;
  const Decimal lo = range->lo.numeric();
  const Decimal hi = range->hi.numeric();
  const Decimal step = range->step.numeric();
  if (step.micros() <= 0 || hi < lo) return out;
  for (Decimal x = lo; x <= hi; x = x + step) {
    out.push_back(kind == ValueType::Int ? Value::integer(x.micros() / Decimal::kScale)
                                         : Value::decimal(x));
  }
  return out;
}

}  // namespace gsm
