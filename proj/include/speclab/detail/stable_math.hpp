#ifndef SPECLAB_DETAIL_STABLE_MATH_HH
#define SPECLAB_DETAIL_STABLE_MATH_HH

/// \file stable_math.hpp
/// Small cancellation-free building blocks shared by the kernel and
/// closed-form solution evaluators.

#include <cmath>

namespace speclab::detail {

/// sin(x)/x. Below the threshold the even Taylor polynomial takes over;
/// four terms keep the truncation error under 1e-25 there.
inline double sinc(double x) {
    if (std::abs(x) < 1e-3) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0 - x2 * x2 * x2 / 5040.0;
    }
    return std::sin(x) / x;
}

/// sinc(a) - sinc(b) without forming the near-equal values: the
/// difference of the Taylor series factors as (b^2 - a^2) times a smooth
/// series. Truncation stays below 1e-14 relative for |a|, |b| up to 0.1.
inline double sinc_diff_series(double a, double b) {
    const double a2 = a * a, b2 = b * b;
    return (b2 - a2) *
           (1.0 / 6.0 - (a2 + b2) / 120.0 + (a2 * a2 + a2 * b2 + b2 * b2) / 5040.0 -
            (a2 * a2 * a2 + a2 * a2 * b2 + a2 * b2 * b2 + b2 * b2 * b2) / 362880.0);
}

/// sinc(a) - sinc(b), branch chosen by argument size. Direct subtraction
/// below 0.1 would lose up to five digits of the difference; the factored
/// series takes over there.
inline double sinc_diff(double a, double b) {
    if (std::abs(a) < 0.1 && std::abs(b) < 0.1) return sinc_diff_series(a, b);
    return sinc(a) - sinc(b);
}

/// cos(a) - cos(b) as a product of sines; exact identity, no cancellation.
inline double cos_diff(double a, double b) {
    return -2.0 * std::sin(0.5 * (a + b)) * std::sin(0.5 * (a - b));
}

/// e^{-p} - e^{-q} = e^{-q} (e^{q-p} - 1) evaluated through expm1.
inline double exp_diff(double p, double q) {
    return std::exp(-q) * std::expm1(q - p);
}

}  // namespace speclab::detail

#endif  // SPECLAB_DETAIL_STABLE_MATH_HH
