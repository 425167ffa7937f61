#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracvisco/dataio.hpp"
#include "fracvisco/l1solver.hpp"
#include "fracvisco/models.hpp"
#include "fracvisco/pso.hpp"

namespace fracvisco::calib {

/// Sum of squared residuals (Pa^2).
double cost_fn(std::span<const double> data, std::span<const double> model);
/// ||data - model||_2 / ||data||_2 * 100.
double lse(std::span<const double> data, std::span<const double> model);
/// sqrt(mean squared residual) / max(data) * 100.
double rmse(std::span<const double> data, std::span<const double> model);

/// Search box used when none is given: pseudo-constants in [0, 1e8] Pa s^alpha
/// and orders in [1e-4, 0.9999] for the linear models; A in [1e4, 1e5] Pa,
/// B in [0, 2], E in [0, 1] for FQLV.
std::vector<pso::Bounds> default_bounds(models::ModelKind kind);
/// 30 particles; 1000 iterations for linear models, 100 for FQLV.
pso::PsoConfig default_pso(models::ModelKind kind);

struct FitOptions {
    double dt = data::kDefaultDataDt;
    std::size_t restarts = 1;
    /// Swarm coordinates for the pseudo-constants of SB/FKV/FM: u in [0, 1]
    /// maps onto [lo, hi] through lo + (hi - lo)(10^(k u) - 1)/(10^k - 1),
    /// k = kPseudoDecades, so the search resolves every decade of the box
    /// equally. The physical box is unchanged. False searches linearly.
    bool log_pseudo_constants = true;
};

inline constexpr double kPseudoDecades = 8.0;

enum class SearchScale { Linear, Log };

/// One search coordinate: the physical box and how the swarm traverses it.
struct SearchDim {
    pso::Bounds bounds;
    SearchScale scale = SearchScale::Linear;

    pso::Bounds swarm_bounds() const;
    double to_physical(double u) const;
    double to_swarm(double x) const;
};

std::vector<SearchDim> search_space(models::ModelKind kind, const std::vector<pso::Bounds>& bounds,
                                    bool log_pseudo_constants);

struct FitResult {
    models::ModelKind kind = models::ModelKind::SB;
    models::ModelParams params;
    double cost = 0.0;
    double lse_percent = 0.0;
    double rmse_percent = 0.0;
    pso::PsoTrace trace;          // trace of the winning restart
    data::TimeSeries data_stress; // fitted window
    data::TimeSeries model_stress;
    data::TimeSeries residual;    // data - model
    double dt = 0.0;
    std::uint64_t seed = 0;       // seed of the winning restart
    std::vector<pso::Bounds> bounds;
    pso::PsoConfig pso;
    std::size_t restarts = 1;
    std::string window;           // "first_step" or "all_steps"
    std::vector<SearchDim> search;
};

/// Samples used to fit `kind`: linear models see the record up to the
/// second onset (the first step, including its loading ramp and peak);
/// FQLV sees every step.
data::ExperimentRecord fit_window(const data::ExperimentRecord& rec, models::ModelKind kind);

/// Forward-solves `params` on a uniform grid of step `dt` driven by the
/// record's strain and maps the stress back to the record's sample times.
data::TimeSeries model_response(const models::ModelParams& params, const data::ExperimentRecord& window, double dt);

/// Strain resampled to a uniform grid starting at the record's first sample.
l1::GridSeries uniform_strain(const data::ExperimentRecord& window, double dt);

/// PSO calibration of one model. Bounds come from cfg.bounds or, when
/// empty, default_bounds(kind). Restart r uses seed cfg.seed + r. The
/// trace's best_position is reported in physical units.
FitResult fit(const data::ExperimentRecord& rec, models::ModelKind kind, const pso::PsoConfig& cfg,
              const FitOptions& opts = {});

nlohmann::json to_json(const FitResult& r);

struct ReportRow {
    models::ModelKind kind = models::ModelKind::SB;
    std::optional<FitResult> fit;
    std::string error;            // set when the fit failed
    std::size_t n_params = 0;
    std::string slope_verdict;    // "consistent", "inconsistent" or "n/a"
};

struct ReportOptions {
    FitOptions fit;
    pso::PsoConfig linear_pso = default_pso(models::ModelKind::SB);
    pso::PsoConfig fqlv_pso = default_pso(models::ModelKind::FQLV);
    data::ModulusOptions modulus;
    double slope_tol = 0.05;
    /// RMSE gap (percentage points) under which fewer parameters win.
    double tie_margin_pp = 0.25;
    bool include_fqlv = true;
    bool parallel = false;
};

struct ExistenceReport {
    data::ModulusEstimate modulus;
    data::Recommendation recommendation;
    std::vector<ReportRow> linear;   // ranked, best first; failed fits last
    std::optional<ReportRow> fqlv;   // multi-step nonlinear stage
    ReportOptions options;
};

/// Ranks rows: repeatedly take the lowest remaining RMSE, then prefer the
/// candidate with the fewest parameters among those within `margin_pp` of
/// it (lower RMSE breaks remaining ties). Failed fits go last.
std::vector<std::size_t> rank_rows(const std::vector<ReportRow>& rows, double margin_pp);

ExistenceReport existence_report(const data::ExperimentRecord& rec, const ReportOptions& opts = {});

nlohmann::json to_json(const ExistenceReport& r);
/// Plain-text table; pseudo-constants in kPa s^alpha, percents to 2 decimals.
std::string render_table(const ExistenceReport& r);

/// Noiseless record generated by forward simulation: samples are the grid
/// nodes, strain is the rasterized protocol.
data::ExperimentRecord synthesize_record(const models::ModelParams& params, const l1::StrainProtocol& proto,
                                         const l1::UniformGrid& grid);

}  // namespace fracvisco::calib
