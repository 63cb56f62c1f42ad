#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fourspace {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// Floor of a nonnegative rational as int64, throwing if it does not fit.
inline std::int64_t floor_to_int64(const Rational& r) {
    if (r < 0) throw std::invalid_argument("floor_to_int64: negative value");
    BigInt q = numerator(r) / denominator(r);
    if (q > std::numeric_limits<std::int64_t>::max())
        throw std::overflow_error("floor_to_int64: value exceeds int64 range");
    return q.convert_to<std::int64_t>();
}

inline std::string to_string(const Rational& r) { return r.str(); }

}  // namespace fourspace
