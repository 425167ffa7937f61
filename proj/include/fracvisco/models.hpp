#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace fracvisco::models {

enum class ModelKind { SB, FKV, FM, FQLV };

std::string_view to_string(ModelKind kind);
/// Accepts "sb", "fkv", "fm", "fqlv" (case-insensitive).
ModelKind parse_model_kind(std::string_view name);
std::size_t parameter_count(ModelKind kind);
bool is_linear(ModelKind kind);

// Pseudo-constants are stored in SI units (Pa s^alpha).

/// Scott-Blair element sigma = E D^alpha eps.
struct SBParams {
    double E = 0.0;
    double alpha = 0.5;

    void validate() const;
};

/// Fractional Kelvin-Voigt: two Scott-Blair elements in parallel.
struct FKVParams {
    double E1 = 0.0;
    double alpha1 = 0.5;
    double E2 = 0.0;
    double alpha2 = 0.5;

    void validate() const;
};

/// Fractional Maxwell: two Scott-Blair elements in series, alpha1 < alpha2.
struct FMParams {
    double E1 = 1.0;
    double alpha1 = 0.2;
    double E2 = 1.0;
    double alpha2 = 0.8;

    void validate() const;
};

/// Fractional quasi-linear viscoelastic model: reduced relaxation
/// E t^-alpha / Gamma(1 - alpha) times the tangent of A (exp(B eps) - 1).
struct FQLVParams {
    double A = 1.0e4;   // Pa
    double B = 1.0;     // dimensionless
    double E = 0.5;     // s^alpha
    double alpha = 0.3;

    void validate() const;
};

using ModelParams = std::variant<SBParams, FKVParams, FMParams, FQLVParams>;

ModelKind kind_of(const ModelParams& p);
void validate(const ModelParams& p);

// Relaxation moduli G(t) for t > 0; t <= 0 throws DomainError.
double relax_sb(const SBParams& p, double t);
double relax_fkv(const FKVParams& p, double t);
double relax_fm(const FMParams& p, double t);
/// Reduced relaxation function of the FQLV model (units s^alpha * s^-alpha).
double relax_fqlv_reduced(const FQLVParams& p, double t);

/// Exponential instantaneous elastic response and its tangent.
struct ElasticResponse {
    double stress;   // A (exp(B eps) - 1)
    double tangent;  // A B exp(B eps)
};
ElasticResponse elastic_stress(const FQLVParams& p, double strain);

// JSON with unit-bearing field names, e.g.
// {"model":"fm","E1_Pa_s_alpha1":..,"alpha1":..,"E2_Pa_s_alpha2":..,"alpha2":..}
nlohmann::json to_json(const ModelParams& p);
/// Parses and validates; throws ConfigError on missing fields and
/// DomainError on invariant violations.
ModelParams params_from_json(const nlohmann::json& j);

/// Parameter vector in the order used by the calibration search space.
std::vector<double> to_vector(const ModelParams& p);
ModelParams from_vector(ModelKind kind, const std::vector<double>& v);
std::vector<std::string> parameter_names(ModelKind kind);

}  // namespace fracvisco::models
