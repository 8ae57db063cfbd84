#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace blendplan {

// Exact arithmetic everywhere: token counts are integers, weights and
// fractions are arbitrary-precision rationals. Floating point appears only
// at presentation boundaries (reports, learning rates).
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

BigInt floor_to_int(const Rational& r);
std::int64_t floor_to_i64(const Rational& r);

/// Nearest integer, halves toward +infinity.
std::int64_t round_half_up_i64(const Rational& r);

/// Rounds to `places` decimal places, halves away from zero.
Rational round_decimal(const Rational& r, int places);

double to_double(const Rational& r);

std::int64_t to_i64(const BigInt& v);

/// Parses "p/q" fractions and exact decimal/scientific forms ("0.4", "3",
/// "1.5e-2"). The value is taken literally (no percent scaling).
Rational parse_rational(const std::string& text);

/// "p/q" for non-integers, plain "p" otherwise.
std::string to_fraction_string(const Rational& r);

/// Exact decimal expansion, or nullopt when the expansion does not terminate
/// within `max_digits` fractional digits.
std::optional<std::string> to_decimal_string(const Rational& r,
                                             int max_digits = 18);

/// Blend-weight syntax: "24.0" means 24 percent, "3/4" means the exact
/// fraction three quarters. Bare integers are percent.
Rational parse_weight(const std::string& text);

/// Emits percent with exact decimals when terminating ("24.0", "35.96"),
/// falling back to an exact "p/q" fraction-of-one otherwise.
std::string weight_to_string(const Rational& w);

/// Token-count syntax: plain integers, scientific notation ("1e12"), or
/// K/M/B/T suffixes ("300B", "1.7T"). Must denote an exact non-negative
/// integer number of tokens.
std::int64_t parse_token_count(const std::string& text);

}  // namespace blendplan
