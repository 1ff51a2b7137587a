#include "stochalign/rational.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stochalign {

namespace {

using boost::multiprecision::cpp_int;

double log10_of_integer(const cpp_int& value) {
  // Keep the top 60 bits and account for the rest with a power of two.
  const auto bits = boost::multiprecision::msb(value) + 1;
  if (bits <= 60) return std::log10(value.convert_to<double>());
  const auto shift = bits - 60;
  const cpp_int top = value >> shift;
  return std::log10(top.convert_to<double>()) + static_cast<double>(shift) * std::log10(2.0);
}

cpp_int pow10(unsigned exponent) {
  cpp_int out = 1;
  for (unsigned i = 0; i < exponent; ++i) out *= 10;
  return out;
}

}  // namespace

double log10_of(const Rational& value) {
  if (value <= 0) throw std::domain_error("log10 of non-positive rational");
  return log10_of_integer(boost::multiprecision::numerator(value)) -
         log10_of_integer(boost::multiprecision::denominator(value));
}

double to_double(const Rational& value) {
  if (value == 0) return 0.0;
  const double direct = value.convert_to<double>();
  if (std::isfinite(direct) && direct != 0.0) return direct;
  const double sign = value < 0 ? -1.0 : 1.0;
  return sign * std::pow(10.0, log10_of(value < 0 ? Rational(-value) : value));
}

Rational parse_decimal(std::string_view text) {
  std::size_t i = 0;
  const auto fail = [&] { throw std::invalid_argument("malformed decimal '" + std::string(text) + "'"); };
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
    negative = text[i] == '-';
    ++i;
  }
  cpp_int mantissa = 0;
  int fraction_digits = 0;
  bool any_digit = false;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
    mantissa = mantissa * 10 + (text[i] - '0');
    any_digit = true;
    ++i;
  }
  if (i < text.size() && text[i] == '.') {
    ++i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      mantissa = mantissa * 10 + (text[i] - '0');
      ++fraction_digits;
      any_digit = true;
      ++i;
    }
  }
  if (!any_digit) fail();
  long exponent = 0;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    bool exp_negative = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
      exp_negative = text[i] == '-';
      ++i;
    }
    bool exp_digit = false;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      exponent = exponent * 10 + (text[i] - '0');
      if (exponent > 4000) fail();
      exp_digit = true;
      ++i;
    }
    if (!exp_digit) fail();
    if (exp_negative) exponent = -exponent;
  }
  if (i != text.size()) fail();

  const long scale = exponent - fraction_digits;
  Rational out = scale >= 0 ? Rational(mantissa * pow10(static_cast<unsigned>(scale)))
                            : Rational(mantissa, pow10(static_cast<unsigned>(-scale)));
  return negative ? Rational(-out) : out;
}

std::string format_rational(const Rational& value) {
  const cpp_int num = boost::multiprecision::numerator(value);
  cpp_int den = boost::multiprecision::denominator(value);
  if (den == 1) return num.str();

  // Finite decimal iff the denominator has no prime factors besides 2 and 5.
  cpp_int rest = den;
  unsigned twos = 0, fives = 0;
  while (rest % 2 == 0) {
    rest /= 2;
    ++twos;
  }
  while (rest % 5 == 0) {
    rest /= 5;
    ++fives;
  }
  if (rest != 1) return num.str() + "/" + den.str();

  const unsigned digits = std::max(twos, fives);
  const cpp_int scaled = num * pow10(digits) / den;
  const bool negative = scaled < 0;
  std::string body = (negative ? cpp_int(-scaled) : scaled).str();
  if (body.size() <= digits) body.insert(0, digits - body.size() + 1, '0');
  body.insert(body.size() - digits, ".");
  return (negative ? "-" : "") + body;
}

}  // namespace stochalign
