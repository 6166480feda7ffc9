#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace porosity {

/// Exact rational number. All cube geometry and all dyadic measure sums are
/// carried in this type.
using Rational = mpq_class;
using Integer = mpz_class;

/// Parses "p/q", "p", or a finite decimal such as "0.25" into an exact
/// rational. Throws std::invalid_argument on malformed input or zero
/// denominator.
Rational parse_rational(std::string_view text);

/// Canonical "p/q" form; integers are written without a denominator.
std::string to_string(const Rational& value);

Integer floor(const Rational& value);
Integer ceil(const Rational& value);

/// 2^-k as an exact rational (k >= 0).
Rational pow2_neg(unsigned k);

double to_double(const Rational& value);

/// floor(value * 2^bits) for value in [0, 1), as a fixed-point integer.
/// Values below 0 clamp to 0 and values >= 1 clamp to 2^bits - 1.
std::uint64_t fixed_point_floor(const Rational& value, unsigned bits);

}  // namespace porosity
