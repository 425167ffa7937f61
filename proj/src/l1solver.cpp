#include "fracvisco/l1solver.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <utility>
#include <vector>

#include "fracvisco/errors.hpp"
#include "fracvisco/specfun.hpp"

namespace fracvisco::l1 {

UniformGrid::UniformGrid(double t0_, double dt_, std::size_t n) : t0(t0_), dt(dt_), n_steps(n) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("uniform grid: dt must be > 0");
    if (!std::isfinite(t0)) throw ConfigError("uniform grid: t0 must be finite");
    if (n_steps < 1) throw ConfigError("uniform grid: need at least one step");
}

UniformGrid UniformGrid::covering(double t0, double t_end, double dt) {
    if (!(dt > 0.0)) throw ConfigError("uniform grid: dt must be > 0");
    if (!(t_end > t0)) throw ConfigError("uniform grid: t_end must exceed t0");
    const double steps = (t_end - t0) / dt;
    // Tolerate round-off when the span is an exact multiple of dt.
    auto n = static_cast<std::size_t>(std::ceil(steps - 1e-9));
    return UniformGrid(t0, dt, std::max<std::size_t>(n, 1));
}

std::vector<double> UniformGrid::times() const {
    std::vector<double> t(nodes());
    for (std::size_t n = 0; n < t.size(); ++n) t[n] = time(n);
    return t;
}

GridSeries::GridSeries(UniformGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.nodes()) throw DataError("grid series: value count does not match grid nodes");
}

L1Weights::L1Weights(double nu, std::size_t n) : nu_(nu), b_(n) {
    if (!(nu > -1.0 && nu < 1.0)) throw DomainError("L1 weights: effective order must lie in (-1, 1)");
    const double p = 1.0 - nu;
    if (n > 0) b_[0] = 1.0;
    for (std::size_t j = 1; j < n; ++j) {
        // (j+1)^p - j^p without cancellation for large j.
        const double jd = static_cast<double>(j);
        b_[j] = std::pow(jd, p) * std::expm1(p * std::log1p(1.0 / jd));
    }
}

void StrainProtocol::validate() const {
    if (steps.empty()) throw DataError("strain protocol: no steps");
    if (!(ramp >= 0.0) || !std::isfinite(ramp)) throw DataError("strain protocol: ramp must be >= 0");
    double prev_level = 0.0;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto& s = steps[i];
        if (!std::isfinite(s.onset) || !std::isfinite(s.level)) throw DataError("strain protocol: non-finite step");
        if (i > 0 && !(s.onset > steps[i - 1].onset)) {
            std::ostringstream os;
            os << "strain protocol: onset of step " << i << " (" << s.onset
               << " s) does not follow the previous onset (" << steps[i - 1].onset << " s)";
            throw DataError(os.str());
        }
        if (s.level < prev_level) {
            std::ostringstream os;
            os << "strain protocol: level of step " << i << " decreases";
            throw DataError(os.str());
        }
        prev_level = s.level;
    }
}

StrainProtocol five_step_protocol(double first_onset, double ramp) {
    constexpr double kLevels[] = {0.25, 0.50, 1.00, 1.50, 2.00};
    constexpr double kMinutes[] = {30.0, 45.0, 45.0, 45.0, 45.0};
    StrainProtocol p;
    p.ramp = ramp;
    double t = first_onset;
    for (std::size_t i = 0; i < 5; ++i) {
        p.steps.push_back({t, kLevels[i]});
        t += 60.0 * kMinutes[i];
    }
    return p;
}

double five_step_protocol_duration() { return 60.0 * (30.0 + 4 * 45.0); }

RasterizedStrain rasterize_protocol(const StrainProtocol& proto, const UniformGrid& grid) {
    proto.validate();
    RasterizedStrain out;
    out.ramp_steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(proto.ramp / grid.dt)));
    const std::size_t m = out.ramp_steps;

    std::vector<std::size_t> nodes(proto.steps.size());
    for (std::size_t i = 0; i < proto.steps.size(); ++i) {
        const double onset = proto.steps[i].onset;
        const double pos = (onset - grid.t0) / grid.dt;
        const long long k = std::llround(pos);
        if (k < 0 || static_cast<std::size_t>(k) + m > grid.n_steps) {
            std::ostringstream os;
            os << "strain protocol: step " << i << " at " << onset << " s (plus ramp) lies outside the grid ["
               << grid.t0 << ", " << grid.t_end() << "] s";
            throw RangeError(os.str());
        }
        nodes[i] = static_cast<std::size_t>(k);
        if (std::abs(pos - static_cast<double>(k)) > 1e-9) {
            out.snapped.push_back({i, onset, grid.time(nodes[i]), nodes[i]});
        }
        if (i > 0 && nodes[i] < nodes[i - 1] + m) {
            std::ostringstream os;
            os << "strain protocol: steps " << i - 1 << " and " << i
               << " coincide or overlap on the grid (onsets must be at least one ramp apart)";
            throw DataError(os.str());
        }
    }

    std::vector<double> eps(grid.nodes(), 0.0);
    double level = 0.0;
    std::size_t next = 0;
    for (std::size_t n = 0; n < eps.size(); ++n) {
        while (next < nodes.size() && n > nodes[next] + m) {
            level = proto.steps[next].level;
            ++next;
        }
        if (next < nodes.size() && n >= nodes[next]) {
            const double from = level;
            const double to = proto.steps[next].level;
            const auto r = static_cast<double>(n - nodes[next]) / static_cast<double>(m);
            eps[n] = (n - nodes[next] == m) ? to : from + (to - from) * r;
        } else {
            eps[n] = level;
        }
    }
    out.strain = GridSeries(grid, std::move(eps));
    return out;
}

namespace {

void require_zero_start(const GridSeries& strain) {
    if (strain.values.empty() || strain.values.front() != 0.0) {
        std::ostringstream os;
        os << "forward solve requires zero initial strain (got "
           << (strain.values.empty() ? std::numeric_limits<double>::quiet_NaN() : strain.values.front()) << ")";
        throw DataError(os.str());
    }
}

// Sum_{j=0}^{n} w[j] * x[n - j] arranged as a contiguous dot product: the
// history stores increments back to front so the newest sits at the lowest
// address of the active window.
class ReversedHistory {
public:
    explicit ReversedHistory(std::size_t capacity) : buf_(capacity), count_(0) {}

    void push(double v) {
        ++count_;
        buf_[buf_.size() - count_] = v;
        if (v != 0.0) nonzero_.push_back({count_, v});
    }

    std::size_t size() const { return count_; }

    /// sum_{j=first}^{count-1+first} w[j] * (value pushed j-first pushes ago)
    double dot(std::span<const double> w, std::size_t first) const {
        // Held strain leaves most increments exactly zero.
        if (nonzero_.size() * 16 < count_) {
            double s = 0.0;
            for (const auto& [p, v] : nonzero_) s += w[first + count_ - p] * v;
            return s;
        }
        const double* x = buf_.data() + (buf_.size() - count_);
        const double* b = w.data() + first;
        return dot_kernel(b, x, count_);
    }

private:
    static double dot_kernel(const double* b, const double* x, std::size_t n) {
        double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
        std::size_t i = 0;
        for (; i + 8 <= n; i += 8) {
            for (std::size_t l = 0; l < 8; ++l) acc[l] += b[i + l] * x[i + l];
        }
        double tail = 0.0;
        for (; i < n; ++i) tail += b[i] * x[i];
        return ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail;
    }

    std::vector<double> buf_;
    std::size_t count_;
    std::vector<std::pair<std::size_t, double>> nonzero_;  // (push number, value)
};

// L1 constant 1 / (Gamma(2 - nu) dt^nu).
double l1_scale(double nu, double dt) { return specfun::rgamma(2.0 - nu) * std::pow(dt, -nu); }

}  // namespace

GridSeries step_sb(const models::SBParams& p, const GridSeries& strain) {
    require_zero_start(strain);
    const std::size_t N = strain.grid.n_steps;
    const L1Weights b(p.alpha, N);
    const double c1 = p.E * l1_scale(p.alpha, strain.grid.dt);
    std::vector<double> sigma(N + 1, 0.0);
    ReversedHistory de(N);
    const auto& eps = strain.values;
    for (std::size_t n = 0; n < N; ++n) {
        de.push(eps[n + 1] - eps[n]);
        sigma[n + 1] = c1 * de.dot(b.values(), 0);
    }
    return GridSeries(strain.grid, std::move(sigma));
}

GridSeries step_fkv(const models::FKVParams& p, const GridSeries& strain) {
    require_zero_start(strain);
    const std::size_t N = strain.grid.n_steps;
    const L1Weights b1(p.alpha1, N);
    const L1Weights b2(p.alpha2, N);
    const double c1 = p.E1 * l1_scale(p.alpha1, strain.grid.dt);
    const double c2 = p.E2 * l1_scale(p.alpha2, strain.grid.dt);
    std::vector<double> sigma(N + 1, 0.0);
    ReversedHistory de(N);
    const auto& eps = strain.values;
    for (std::size_t n = 0; n < N; ++n) {
        de.push(eps[n + 1] - eps[n]);
        sigma[n + 1] = c1 * de.dot(b1.values(), 0) + c2 * de.dot(b2.values(), 0);
    }
    return GridSeries(strain.grid, std::move(sigma));
}

GridSeries step_fm(const models::FMParams& p, const GridSeries& strain) {
    p.validate();
    require_zero_start(strain);
    const std::size_t N = strain.grid.n_steps;
    const double dt = strain.grid.dt;
    // Strain side: Caputo derivative of order alpha1. Stress side: the
    // fractional integral of order alpha2 - alpha1, i.e. L1 weights with
    // negative effective order nu = alpha1 - alpha2.
    const double nu = p.alpha1 - p.alpha2;
    const L1Weights be(p.alpha1, N);
    const L1Weights bs(nu, N);
    const double c1 = p.E1 * l1_scale(p.alpha1, dt);
    const double c2 = (p.E1 / p.E2) * l1_scale(nu, dt);
    std::vector<double> sigma(N + 1, 0.0);
    ReversedHistory de(N);
    ReversedHistory ds(N);
    const auto& eps = strain.values;
    for (std::size_t n = 0; n < N; ++n) {
        // Stress history uses increments up to sigma_n - sigma_{n-1} with
        // weights b_1..b_n.
        const double hs = ds.size() > 0 ? ds.dot(bs.values(), 1) : 0.0;
        de.push(eps[n + 1] - eps[n]);
        const double strain_part = c1 * de.dot(be.values(), 0);
        sigma[n + 1] = (strain_part + c2 * (sigma[n] - hs)) / (1.0 + c2);
        ds.push(sigma[n + 1] - sigma[n]);
    }
    return GridSeries(strain.grid, std::move(sigma));
}

GridSeries step_fqlv(const models::FQLVParams& p, const GridSeries& strain) {
    require_zero_start(strain);
    const std::size_t N = strain.grid.n_steps;
    const L1Weights b(p.alpha, N);
    const double c1 = p.E * p.A * p.B * l1_scale(p.alpha, strain.grid.dt);
    std::vector<double> sigma(N + 1, 0.0);
    ReversedHistory w(N);
    const auto& eps = strain.values;
    for (std::size_t n = 0; n < N; ++n) {
        // Trapezoidal midpoint value of the exponential tangent factor.
        const double mid = 0.5 * (eps[n] + eps[n + 1]);
        w.push(std::exp(p.B * mid) * (eps[n + 1] - eps[n]));
        sigma[n + 1] = c1 * w.dot(b.values(), 0);
    }
    return GridSeries(strain.grid, std::move(sigma));
}

GridSeries simulate(const models::ModelParams& p, const GridSeries& strain) {
    return std::visit(
        [&](const auto& q) -> GridSeries {
            using T = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<T, models::SBParams>) {
                return step_sb(q, strain);
            } else if constexpr (std::is_same_v<T, models::FKVParams>) {
                return step_fkv(q, strain);
            } else if constexpr (std::is_same_v<T, models::FMParams>) {
                return step_fm(q, strain);
            } else {
                return step_fqlv(q, strain);
            }
        },
        p);
}

void write_csv(std::ostream& os, const GridSeries& s) {
    os << "time_s,value\n";
    os << std::setprecision(17);
    for (std::size_t n = 0; n < s.values.size(); ++n) os << s.grid.time(n) << ',' << s.values[n] << '\n';
}

}  // namespace fracvisco::l1
