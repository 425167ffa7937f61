#include "fracvisco/specfun.hpp"

#include <mpfr.h>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

#include "fracvisco/errors.hpp"

namespace fracvisco::specfun {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

// sin(pi x) with argument reduction done exactly in binary floating point.
double sin_pi(double x) {
    double r = std::fmod(x, 2.0);
    if (r == 0.0 || r == 1.0 || r == -1.0) return 0.0;
    return std::sin(std::numbers::pi * r);
}

// Sign of Gamma(x) for x not a pole.
int gamma_sign(double x) {
    if (x > 0.0) return 1;
    return (static_cast<long long>(std::floor(x)) % 2 == 0) ? 1 : -1;
}

// log|1/Gamma(x)| and its sign; sign 0 marks a pole (exact zero).
struct LogTerm {
    double log_abs;
    int sign;
};

LogTerm log_rgamma(double x) {
    if (is_nonpositive_integer(x)) return {-kInf, 0};
    if (x > 0.0) return {-std::lgamma(x), 1};
    // Reflection: 1/Gamma(x) = Gamma(1-x) sin(pi x) / pi.
    const double s = sin_pi(x);
    if (s == 0.0) return {-kInf, 0};
    return {std::lgamma(1.0 - x) + std::log(std::abs(s) / std::numbers::pi), s > 0.0 ? 1 : -1};
}

class Mpfr {
public:
    explicit Mpfr(mpfr_prec_t prec) { mpfr_init2(v_, prec); }
    ~Mpfr() { mpfr_clear(v_); }
    Mpfr(const Mpfr&) = delete;
    Mpfr& operator=(const Mpfr&) = delete;
    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }

private:
    mpfr_t v_;
};

// Largest log-magnitude of the series terms |z|^k / |Gamma(ak+b)| and the
// index where the terms have decayed far below it.
struct SeriesShape {
    double log_max;
    long long k_peak;
};

SeriesShape series_shape(double a, double b, double z) {
    const double lz = std::log(std::abs(z));
    SeriesShape s{-kInf, 0};
    for (long long k = 0;; ++k) {
        const LogTerm g = log_rgamma(a * static_cast<double>(k) + b);
        const double lt = static_cast<double>(k) * lz + g.log_abs;
        if (g.sign != 0 && lt > s.log_max) {
            s.log_max = lt;
            s.k_peak = k;
        }
        if (k > s.k_peak + 8 && a * static_cast<double>(k) + b > 2.0 && lt < s.log_max - 60.0) break;
    }
    return s;
}

double series_extended(double a, double b, double z) {
    // Neumaier-compensated summation in long double.
    const long double lz = std::log(std::abs(static_cast<long double>(z)));
    long double sum = 0.0L;
    long double comp = 0.0L;
    long double log_peak = -static_cast<long double>(kInf);
    for (long long k = 0;; ++k) {
        const long double x = static_cast<long double>(a) * k + b;
        long double term = 0.0L;
        long double log_term = -static_cast<long double>(kInf);
        if (!(x <= 0.0L && x == std::floor(x))) {
            const int sign = (z < 0.0 && (k % 2 != 0)) ? -1 : 1;
            int gsign = 1;
            long double lg;
            if (x > 0.0L) {
                lg = std::lgamma(x);
            } else {
                lg = std::lgamma(x);
                gsign = gamma_sign(static_cast<double>(x));
            }
            log_term = (k == 0 ? 0.0L : k * lz) - lg;
            term = sign * gsign * std::exp(log_term);
        }
        const long double t = sum + term;
        if (std::abs(sum) >= std::abs(term))
            comp += (sum - t) + term;
        else
            comp += (term - t) + sum;
        sum = t;
        log_peak = std::max(log_peak, log_term);
        if (x > 2.0L && k > 4 && log_term < log_peak - 60.0L) {
            const long double total = sum + comp;
            if (total == 0.0L || log_term < std::log(std::abs(total)) - 50.0L) break;
        }
    }
    return static_cast<double>(sum + comp);
}

double series_mpfr(double a, double b, double z, double loss_nats) {
    const auto prec = static_cast<mpfr_prec_t>(96 + std::ceil(loss_nats / std::numbers::ln2));
    Mpfr sum(prec), zk(prec), x(prec), g(prec), term(prec), ma(prec), mb(prec), mz(prec);
    mpfr_set_d(ma.get(), a, MPFR_RNDN);
    mpfr_set_d(mb.get(), b, MPFR_RNDN);
    mpfr_set_d(mz.get(), z, MPFR_RNDN);
    mpfr_set_zero(sum.get(), 1);
    mpfr_set_ui(zk.get(), 1, MPFR_RNDN);

    const double lz = std::log(std::abs(z));
    double log_peak = -kInf;
    for (long long k = 0;; ++k) {
        const double xd = a * static_cast<double>(k) + b;
        double log_term = -kInf;
        if (!is_nonpositive_integer(xd)) {
            mpfr_mul_si(x.get(), ma.get(), static_cast<long>(k), MPFR_RNDN);
            mpfr_add(x.get(), x.get(), mb.get(), MPFR_RNDN);
            mpfr_gamma(g.get(), x.get(), MPFR_RNDN);
            mpfr_div(term.get(), zk.get(), g.get(), MPFR_RNDN);
            mpfr_add(sum.get(), sum.get(), term.get(), MPFR_RNDN);
            log_term = static_cast<double>(k) * lz + log_rgamma(xd).log_abs;
        }
        mpfr_mul(zk.get(), zk.get(), mz.get(), MPFR_RNDN);
        log_peak = std::max(log_peak, log_term);
        if (xd > 2.0 && k > 4 && log_term < log_peak - 60.0) {
            const double total = mpfr_get_d(sum.get(), MPFR_RNDN);
            if (total == 0.0 || log_term < std::log(std::abs(total)) - 50.0) break;
        }
    }
    return mpfr_get_d(sum.get(), MPFR_RNDN);
}

// Switch point on the negative axis expressed in y = |z|^(1/a). Beyond it
// the smallest asymptotic term, about exp(-y), is negligible against the
// algebraic tail. Near a = 1 the leading algebraic coefficients vanish, so
// the series is kept much longer there.
double switch_y(double a) { return a < 0.9 ? 36.0 : 200.0; }

constexpr double kPositiveSwitchY = 50.0;

}  // namespace

double gamma_fn(double x) {
    if (std::isnan(x)) throw DomainError("gamma_fn: NaN argument");
    if (is_nonpositive_integer(x)) {
        std::ostringstream os;
        os << "gamma_fn: pole at x = " << x;
        throw DomainError(os.str());
    }
    return std::tgamma(x);
}

double rgamma(double x) {
    if (is_nonpositive_integer(x)) return 0.0;
    if (x > 171.0) return std::exp(-std::lgamma(x));
    if (x < -170.0) {
        const LogTerm t = log_rgamma(x);
        return t.sign * std::exp(t.log_abs);
    }
    return 1.0 / std::tgamma(x);
}

MLParams::MLParams(double a_, double b_, double z_) : a(a_), b(b_), z(z_) {
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("mittag_leffler: order a must be > 0");
    if (!std::isfinite(b)) throw DomainError("mittag_leffler: b must be finite");
    if (!std::isfinite(z)) throw DomainError("mittag_leffler: z must be finite");
}

namespace detail {

double ml_switch_radius(double a) { return std::pow(switch_y(a), a); }

double ml_series(double a, double b, double z) {
    if (z == 0.0) return rgamma(b);
    const SeriesShape shape = series_shape(a, b, z);
    const double y = std::pow(std::abs(z), 1.0 / a);
    // Cancellation loss: peak term against the result, which on the negative
    // axis may be as small as exp(-y).
    double loss = std::max(0.0, shape.log_max);
    if (z < 0.0) loss += y;
    if (loss <= 12.0) return series_extended(a, b, z);
    return series_mpfr(a, b, z, loss + 10.0);
}

double ml_asymptotic(double a, double b, double z) {
    if (!(a < 2.0)) throw DomainError("ml_asymptotic: requires a < 2");
    if (z == 0.0) throw DomainError("ml_asymptotic: requires z != 0");
    const double lz = std::log(std::abs(z));
    const double y = std::exp(lz / a);

    // Exponential contributions.
    double expo = 0.0;
    if (z > 0.0) {
        const double log_e = y + (1.0 - b) / a * lz - std::log(a);
        if (log_e > 709.0) return kInf;
        expo = std::exp(log_e);
    } else if (a > 1.0) {
        const std::complex<double> zeta = std::polar(y, std::numbers::pi / a);
        const std::complex<double> c = std::pow(zeta, 1.0 - b) * std::exp(zeta);
        expo = 2.0 * c.real() / a;
    } else if (a == 1.0 && b == std::floor(b)) {
        expo = std::pow(z, 1.0 - b) * std::exp(z);
    }

    // Algebraic part -sum_{k>=1} z^{-k} / Gamma(b - a k), truncated at its
    // smallest term.
    long double sum = 0.0L;
    double prev_env = kInf;
    for (long long k = 1; k < 100000; ++k) {
        const double x = b - a * static_cast<double>(k);
        // Smooth bound on |1/Gamma(x)| that ignores the zeros at the poles.
        const double env = -static_cast<double>(k) * lz + (x >= 2.0 ? -std::lgamma(x) : std::lgamma(2.0 - x));
        if (k > 2 && env > prev_env) break;
        prev_env = env;
        const LogTerm g = log_rgamma(x);
        if (g.sign != 0) {
            const int zsign = (z < 0.0 && (k % 2 != 0)) ? -1 : 1;
            sum -= static_cast<long double>(zsign * g.sign) * std::exp(static_cast<long double>(g.log_abs - static_cast<double>(k) * lz));
        }
        const long double total = sum + expo;
        if (k > 2 && total != 0.0L && env < std::log(std::abs(static_cast<double>(total))) - 45.0) break;
    }
    return static_cast<double>(sum + expo);
}

}  // namespace detail

double mittag_leffler(const MLParams& p) {
    const double a = p.a, b = p.b, z = p.z;
    if (z == 0.0) return rgamma(b);
    const double y = std::exp(std::log(std::abs(z)) / a);
    if (z > 0.0) {
        if (a < 2.0 && y > kPositiveSwitchY) return detail::ml_asymptotic(a, b, z);
        return detail::ml_series(a, b, z);
    }
    if (a < 2.0 && y >= switch_y(a)) return detail::ml_asymptotic(a, b, z);
    return detail::ml_series(a, b, z);
}

double mittag_leffler(double a, double b, double z) { return mittag_leffler(MLParams(a, b, z)); }

}  // namespace fracvisco::specfun
