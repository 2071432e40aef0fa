#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>

namespace grsnet {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

// Exact model parameter p = num/den with its derived constants. All exact
// enumeration code works in BigRat so that inequalities between nearby
// probabilities are decided without rounding.
struct RationalP {
    BigInt num;
    BigInt den;

    RationalP(std::int64_t n, std::int64_t d) : num(n), den(d) {
        if (d <= 0 || n <= 0 || n >= d)
            throw std::invalid_argument("RationalP: require 0 < num/den < 1");
    }

    BigRat p() const { return BigRat(num, den); }
    BigRat q() const { return BigRat(den - num, den); }
    // Far-endpoint openness parameter p' = p/(2-p) of a conditioned hop.
    BigRat p_prime() const { return BigRat(num, 2 * den - num); }
};

inline BigRat rat_pow(const BigRat& base, std::int64_t e) {
    BigRat r(1);
    BigRat b = base;
    std::int64_t n = e;
    if (n < 0) throw std::invalid_argument("rat_pow: negative exponent");
    while (n > 0) {
        if (n & 1) r *= b;
        b *= b;
        n >>= 1;
    }
    return r;
}

inline double to_double(const BigRat& r) {
    return static_cast<double>(r);
}

}  // namespace grsnet
