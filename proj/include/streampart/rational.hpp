#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace streampart {

/// Exact arbitrary-precision rational used for file values and cross-checks.
using Rational = boost::multiprecision::cpp_rational;

/// Parses "12", "-3", "7/3", "0.25" or "1.5e3" exactly. Throws InputError.
Rational parse_rational(std::string_view text);

/// Canonical text form: "12" for integers, "7/3" otherwise.
std::string format_rational(const Rational& value);

double to_double(const Rational& value);

/// A positive rate or bandwidth, or the explicit "unbounded" sentinel.
class Limit {
 public:
  Limit() = default;

  static Limit unbounded() { return Limit(); }
  static Limit of(Rational value) { return Limit(std::move(value)); }

  bool is_unbounded() const noexcept { return !value_.has_value(); }
  bool is_finite() const noexcept { return value_.has_value(); }

  /// Precondition: is_finite().
  const Rational& value() const { return *value_; }

  std::string to_string() const {
    return is_unbounded() ? "unbounded" : format_rational(*value_);
  }

  bool operator==(const Limit& other) const = default;

 private:
  explicit Limit(Rational value) : value_(std::move(value)) {}

  std::optional<Rational> value_;
};

}  // namespace streampart
