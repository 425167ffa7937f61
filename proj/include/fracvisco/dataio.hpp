#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracvisco/l1solver.hpp"

namespace fracvisco::data {

/// Samples (time, value) on a strictly increasing, possibly nonuniform,
/// time base.
struct TimeSeries {
    std::vector<double> time;   // s
    std::vector<double> value;
    std::string unit;

    std::size_t size() const { return time.size(); }
    bool empty() const { return time.empty(); }
    /// Throws DataError on length mismatch or non-increasing time.
    void validate() const;
};

enum class CsvMode { Auto, ForceArea, Stress };

/// One relaxation experiment after ingestion: stress and strain share the
/// time base; force and area are kept when the file provided them.
struct ExperimentRecord {
    std::string sample_id;
    TimeSeries stress;  // Pa
    TimeSeries strain;  // dimensionless
    std::optional<TimeSeries> force;  // N
    std::optional<TimeSeries> area;   // m^2
    l1::StrainProtocol protocol;
    nlohmann::json metadata = nlohmann::json::object();
};

// CSV layouts (header required, extra columns ignored):
//   force/area mode: time_s,force_N,area_m2,strain
//   stress mode:     time_s,stress_Pa,strain
// True stress is force / area.
ExperimentRecord ingest_csv(const std::filesystem::path& path, CsvMode mode = CsvMode::Auto,
                            const std::optional<l1::StrainProtocol>& protocol = std::nullopt);
ExperimentRecord ingest_csv(std::istream& in, const std::string& source_name, CsvMode mode = CsvMode::Auto,
                            const std::optional<l1::StrainProtocol>& protocol = std::nullopt);

/// Writes a record in stress mode (time_s,stress_Pa,strain).
void write_record_csv(std::ostream& os, const ExperimentRecord& rec);

/// Detects held strain levels and their onsets in a step-strain record.
/// A new step starts when the strain rises more than `threshold` above the
/// current held level; its onset is the last sample still at that level.
l1::StrainProtocol infer_protocol(const TimeSeries& strain, double threshold = 0.0);

/// Window size used for "n neighbor points": the next odd count.
std::size_t centered_window(std::size_t neighbors);

/// Centered moving average over an odd window. Near the ends the window is
/// truncated symmetrically, so it shrinks to the single sample at each end.
TimeSeries moving_average(const TimeSeries& series, std::size_t window);

/// Filters stress, strain (and force/area) and records the settings in
/// metadata["filter"]. The protocol is left untouched.
ExperimentRecord filter_record(const ExperimentRecord& rec, std::size_t window);

struct SlopeFit {
    bool available = false;
    double slope = 0.0;
    double intercept = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
};

/// Least-squares line through (log t, log v) for samples with t > 0, v > 0.
/// Unavailable when fewer than `min_samples` points qualify.
SlopeFit loglog_slope(std::span<const double> t, std::span<const double> v, std::size_t min_samples = 5);

struct ModulusOptions {
    double t_short_max = 3.0;   // s, upper bound of the short-time window
    double t_long_min = 400.0;  // s, lower bound of the long-time window
    std::size_t onset_skip = 2; // ramp samples excluded from slope fits
    std::size_t min_samples = 5;
};

struct StepModulus {
    std::size_t step = 0;
    double strain_level = 0.0;
    double onset = 0.0;       // s, absolute time of the window's first sample
    TimeSeries modulus;       // G(t) = sigma / eps_i with t re-origined to 0
    SlopeFit beta1;
    SlopeFit beta2;
};

/// Per-step relaxation moduli; beta1/beta2 are those of the first step.
struct ModulusEstimate {
    std::vector<StepModulus> per_step;
    SlopeFit beta1;
    SlopeFit beta2;
    ModulusOptions options;
    nlohmann::json filter = nullptr;
};

ModulusEstimate estimate_modulus(const ExperimentRecord& rec, const ModulusOptions& opts = {});
nlohmann::json to_json(const ModulusEstimate& est);

enum class Extrapolation { Error, HoldLast };

/// Linear interpolation onto t0 + n dt, t0 = first sample. The grid stops
/// at the last node inside the data unless `extrap` is HoldLast, in which
/// case it covers the data and holds the final value past its end.
l1::GridSeries resample_to_uniform(const TimeSeries& series, double dt, Extrapolation extrap = Extrapolation::Error);
l1::GridSeries resample_to_grid(const TimeSeries& series, const l1::UniformGrid& grid,
                                Extrapolation extrap = Extrapolation::Error);
/// Linear interpolation back to arbitrary times inside the grid span.
TimeSeries resample_to_nonuniform(const l1::GridSeries& series, std::span<const double> times);

/// Default solver step: smallest sampling interval of the source data.
inline constexpr double kDefaultDataDt = 0.495;

enum class ModelFamily { SB, FMFamily, FKVFamily, InsufficientData };

std::string_view to_string(ModelFamily f);

struct Recommendation {
    ModelFamily family = ModelFamily::InsufficientData;
    std::string rationale;
    SlopeFit beta1;
    SlopeFit beta2;
};

/// Slope-ordering classifier: equal slopes -> SB, slower-to-faster decay
/// (|beta1| < |beta2|) -> FM family, faster-to-slower -> FKV family.
Recommendation recommend_model(const ModulusEstimate& est, double tol = 0.05);
Recommendation recommend_model(const SlopeFit& beta1, const SlopeFit& beta2, double tol = 0.05);

nlohmann::json to_json(const TimeSeries& s);

}  // namespace fracvisco::data
