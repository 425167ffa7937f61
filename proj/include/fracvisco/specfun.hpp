#pragma once

namespace fracvisco::specfun {

/// Euler gamma function. Throws DomainError at the poles x = 0, -1, -2, ...
double gamma_fn(double x);

/// Reciprocal gamma 1/Gamma(x); entire, so it returns 0 at the poles.
double rgamma(double x);

/// Arguments of the two-parameter Mittag-Leffler function E_{a,b}(z).
struct MLParams {
    double a;
    double b;
    double z;

    /// Throws DomainError unless a > 0 and all fields are finite.
    MLParams(double a, double b, double z);
};

/// Two-parameter Mittag-Leffler function
///
///     E_{a,b}(z) = sum_{k>=0} z^k / Gamma(a k + b)
///
/// for real arguments. Small |z| uses the power series with enough working
/// precision to absorb cancellation (extended precision, or MPFR when the
/// largest term exceeds the result by many orders of magnitude). Large
/// negative z uses the algebraic asymptotic expansion
/// -sum_{k>=1} z^{-k}/Gamma(b - a k), plus the oscillating exponential pair
/// when 1 < a < 2. Large positive z adds the dominant exponential term.
/// Results that overflow a double are returned as +inf.
double mittag_leffler(double a, double b, double z);
double mittag_leffler(const MLParams& p);

namespace detail {

/// |z| at which evaluation on the negative axis leaves the series branch.
double ml_switch_radius(double a);

/// Power-series branch, valid for any z; cost grows with |z|^(1/a).
double ml_series(double a, double b, double z);

/// Asymptotic branch for large |z| (requires a < 2).
double ml_asymptotic(double a, double b, double z);

}  // namespace detail

}  // namespace fracvisco::specfun
