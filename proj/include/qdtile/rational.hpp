#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>

namespace qdtile::linalg {

// Exact rational scalar. Arbitrary precision, canonical form (gcd-reduced,
// positive denominator) maintained by the backend. Everything the phi-function
// identities assert is carried in this type with zero tolerance.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline Rational make_ratio(std::int64_t num, std::int64_t den) {
    return Rational(BigInt(num), BigInt(den));
}

// Canonical "p/q" rendering; integers render as "p/1" so that report columns
// stay uniformly parseable.
inline std::string fraction_string(const Rational& r) {
    return numerator(r).str() + "/" + denominator(r).str();
}

inline double to_double(const Rational& r) {
    return r.convert_to<double>();
}

} // namespace qdtile::linalg
