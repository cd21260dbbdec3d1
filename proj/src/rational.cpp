#include "streampart/rational.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include "streampart/error.hpp"

namespace streampart {

namespace {

using boost::multiprecision::cpp_int;

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

[[noreturn]] void bad_number(std::string_view text) {
  throw InputError("invalid number \"" + std::string(text) + "\"");
}

// cpp_int reads a leading 0 as octal
cpp_int decimal_integer(std::string_view digits) {
  const auto first = digits.find_first_not_of('0');
  return first == std::string_view::npos ? cpp_int(0) : cpp_int(std::string(digits.substr(first)));
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.empty()) bad_number(text);

  bool negative = false;
  if (s.front() == '-' || s.front() == '+') {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }

  Rational result;
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    const auto num = s.substr(0, slash);
    const auto den = s.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) bad_number(text);
    const cpp_int d = decimal_integer(den);
    if (d == 0) throw InputError("zero denominator in \"" + std::string(text) + "\"");
    result = Rational(decimal_integer(num), d);
  } else {
    // decimal with optional fraction and exponent
    std::string_view mantissa = s;
    long long exponent = 0;
    if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
      mantissa = s.substr(0, e);
      std::string_view exp_text = s.substr(e + 1);
      bool exp_negative = false;
      if (!exp_text.empty() && (exp_text.front() == '-' || exp_text.front() == '+')) {
        exp_negative = exp_text.front() == '-';
        exp_text.remove_prefix(1);
      }
      if (!all_digits(exp_text) || exp_text.size() > 6) bad_number(text);
      exponent = std::stoll(std::string(exp_text));
      if (exp_negative) exponent = -exponent;
    }
    std::string digits;
    auto dot = mantissa.find('.');
    if (dot != std::string_view::npos) {
      const auto whole = mantissa.substr(0, dot);
      const auto frac = mantissa.substr(dot + 1);
      if ((whole.empty() && frac.empty()) || (!whole.empty() && !all_digits(whole)) ||
          (!frac.empty() && !all_digits(frac))) {
        bad_number(text);
      }
      digits = std::string(whole) + std::string(frac);
      exponent -= static_cast<long long>(frac.size());
    } else {
      if (!all_digits(mantissa)) bad_number(text);
      digits = std::string(mantissa);
    }
    if (std::llabs(exponent) > 4000) bad_number(text);
    const cpp_int value = decimal_integer(digits);
    cpp_int scale = boost::multiprecision::pow(cpp_int(10), static_cast<unsigned>(std::llabs(exponent)));
    result = exponent >= 0 ? Rational(value * scale) : Rational(value, scale);
  }
  return negative ? Rational(-result) : result;
}

std::string format_rational(const Rational& value) {
  const auto num = boost::multiprecision::numerator(value);
  const auto den = boost::multiprecision::denominator(value);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

double to_double(const Rational& value) { return value.convert_to<double>(); }

std::string SearchSpaceTooLarge::format_size(long double size) {
  std::ostringstream os;
  if (size < 1e18L) {
    os << static_cast<unsigned long long>(size);
  } else {
    os << static_cast<double>(size);
  }
  return os.str();
}

}  // namespace streampart
