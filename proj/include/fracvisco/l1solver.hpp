#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "fracvisco/models.hpp"

namespace fracvisco::l1 {

/// Uniform time grid t_n = t0 + n dt, n = 0..n_steps.
struct UniformGrid {
    double t0 = 0.0;
    double dt = 1.0;
    std::size_t n_steps = 1;

    UniformGrid() = default;
    UniformGrid(double t0, double dt, std::size_t n_steps);

    /// Smallest grid starting at t0 whose last node reaches t_end.
    static UniformGrid covering(double t0, double t_end, double dt);

    double time(std::size_t n) const { return t0 + static_cast<double>(n) * dt; }
    double t_end() const { return time(n_steps); }
    std::size_t nodes() const { return n_steps + 1; }
    std::vector<double> times() const;
};

/// Values sampled on every node of a uniform grid.
struct GridSeries {
    UniformGrid grid;
    std::vector<double> values;

    GridSeries() = default;
    GridSeries(UniformGrid g, std::vector<double> v);
};

/// L1 weights b_j = (j+1)^(1-nu) - j^(1-nu), j = 0..n-1, for -1 < nu < 1.
/// Negative nu discretizes a fractional integral of order -nu.
class L1Weights {
public:
    L1Weights(double nu, std::size_t n);

    double nu() const { return nu_; }
    std::size_t size() const { return b_.size(); }
    double operator[](std::size_t j) const { return b_[j]; }
    std::span<const double> values() const { return b_; }

private:
    double nu_;
    std::vector<double> b_;
};

struct ProtocolStep {
    double onset;  // s
    double level;  // cumulative strain reached after the ramp
};

/// Piecewise step-strain schedule. Each step ramps linearly from the
/// previous level to its own over `ramp` seconds, then holds.
struct StrainProtocol {
    std::vector<ProtocolStep> steps;
    double ramp = 0.0;  // s; rounded to a whole number (>= 1) of grid steps

    /// Onsets strictly increasing, levels nondecreasing and >= 0.
    void validate() const;
};

/// Five-stage schedule: levels 0.25, 0.50, 1.00, 1.50, 2.00 held for
/// 30, 45, 45, 45 and 45 minutes; the first onset is at `first_onset`.
StrainProtocol five_step_protocol(double first_onset = 0.0, double ramp = 0.0);
/// Total length of five_step_protocol() measured from its first onset (s).
double five_step_protocol_duration();

struct SnappedOnset {
    std::size_t step;
    double requested;  // s
    double snapped;    // s, on the grid
    std::size_t node;
};

struct RasterizedStrain {
    GridSeries strain;
    std::vector<SnappedOnset> snapped;  // only onsets that moved
    std::size_t ramp_steps = 1;
};

RasterizedStrain rasterize_protocol(const StrainProtocol& proto, const UniformGrid& grid);

// Forward solvers. Strain must start at exactly zero; sigma_0 = 0.
GridSeries step_sb(const models::SBParams& p, const GridSeries& strain);
GridSeries step_fkv(const models::FKVParams& p, const GridSeries& strain);
GridSeries step_fm(const models::FMParams& p, const GridSeries& strain);
GridSeries step_fqlv(const models::FQLVParams& p, const GridSeries& strain);
GridSeries simulate(const models::ModelParams& p, const GridSeries& strain);

/// Two-column CSV "time_s,value" with round-trip precision.
void write_csv(std::ostream& os, const GridSeries& s);

}  // namespace fracvisco::l1
