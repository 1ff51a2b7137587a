#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string_view>

namespace stochalign {

/// Arbitrary-precision rational used for exact probability arithmetic.
using Rational = boost::multiprecision::cpp_rational;

/// log10 of a positive rational, robust to numerators/denominators beyond double range.
double log10_of(const Rational& value);

double to_double(const Rational& value);

/// Parses a plain or scientific decimal literal ("99", "0.25", "1.5e-3") into an exact rational.
/// Throws std::invalid_argument on malformed text.
Rational parse_decimal(std::string_view text);

/// Shortest decimal text that parse_decimal maps back to the same value when the value is a
/// finite decimal; otherwise "num/den".
std::string format_rational(const Rational& value);

}  // namespace stochalign
