#ifndef MLAB_NUMERIC_HPP
#define MLAB_NUMERIC_HPP

// Scalar layer. The numeric core is templated on the scalar type:
//   double          fast mode, tolerance-based checks
//   Rational        exact mode for small spaces, identities checked for == 0
// Only the operations below are used generically, so anything that models
// them would do; the two instantiations above are the supported ones.

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdint>

namespace mlab {

using Rational = boost::multiprecision::cpp_rational;

template <class S>
struct scalar_traits;

template <>
struct scalar_traits<double> {
    static constexpr bool exact = false;
    static double from_int(long v) { return static_cast<double>(v); }
    static double ratio(long num, long den) {
        return static_cast<double>(num) / static_cast<double>(den);
    }
    static double to_double(double v) { return v; }
    static const char* name() { return "float"; }
};

template <>
struct scalar_traits<Rational> {
    static constexpr bool exact = true;
    static Rational from_int(long v) { return Rational(v); }
    static Rational ratio(long num, long den) { return Rational(num, den); }
    static double to_double(const Rational& v) { return v.convert_to<double>(); }
    static const char* name() { return "exact"; }
};

template <class S>
double to_double(const S& v) {
    return scalar_traits<S>::to_double(v);
}

template <class S>
S abs_val(const S& v) {
    return v < S(0) ? S(-v) : v;
}

// Equality tolerance used when validating double-mode invariants (mass sums,
// measurability of inputs). Checks of mathematical identities carry their own
// per-check tolerances; this one is only for input sanity.
inline constexpr double kInputTol = 1e-12;

} // namespace mlab

#endif
