#include "fracvisco/models.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "fracvisco/errors.hpp"
#include "fracvisco/specfun.hpp"

namespace fracvisco::models {

namespace {

[[noreturn]] void invalid(std::string_view model, std::string_view what) {
    std::ostringstream os;
    os << model << " parameters: " << what;
    throw DomainError(os.str());
}

void require_positive_time(double t) {
    if (!(t > 0.0)) {
        std::ostringstream os;
        os << "relaxation modulus is singular at t <= 0 (t = " << t << ")";
        throw DomainError(os.str());
    }
}

bool finite(double x) { return std::isfinite(x); }

double sb_kernel(double E, double alpha, double t) {
    return E * specfun::rgamma(1.0 - alpha) * std::pow(t, -alpha);
}

}  // namespace

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::SB: return "sb";
        case ModelKind::FKV: return "fkv";
        case ModelKind::FM: return "fm";
        case ModelKind::FQLV: return "fqlv";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view name) {
    std::string s(name);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "sb") return ModelKind::SB;
    if (s == "fkv") return ModelKind::FKV;
    if (s == "fm") return ModelKind::FM;
    if (s == "fqlv") return ModelKind::FQLV;
    throw ConfigError("unknown model kind '" + std::string(name) + "' (expected sb, fkv, fm or fqlv)");
}

std::size_t parameter_count(ModelKind kind) { return kind == ModelKind::SB ? 2 : 4; }

bool is_linear(ModelKind kind) { return kind != ModelKind::FQLV; }

void SBParams::validate() const {
    if (!finite(E) || E < 0.0) invalid("SB", "E must be >= 0");
    if (!(alpha >= 1e-4 && alpha <= 0.9999)) invalid("SB", "alpha must lie in [0.0001, 0.9999]");
}

void FKVParams::validate() const {
    if (!finite(E1) || E1 < 0.0) invalid("FKV", "E1 must be >= 0");
    if (!finite(E2) || E2 < 0.0) invalid("FKV", "E2 must be >= 0");
    if (!(alpha1 > 0.0 && alpha1 < 1.0)) invalid("FKV", "alpha1 must lie in (0, 1)");
    if (!(alpha2 > 0.0 && alpha2 < 1.0)) invalid("FKV", "alpha2 must lie in (0, 1)");
}

void FMParams::validate() const {
    if (!finite(E1) || !(E1 > 0.0)) invalid("FM", "E1 must be > 0");
    if (!finite(E2) || !(E2 > 0.0)) invalid("FM", "E2 must be > 0");
    if (!(alpha1 > 0.0 && alpha1 < 1.0)) invalid("FM", "alpha1 must lie in (0, 1)");
    if (!(alpha2 > 0.0 && alpha2 < 1.0)) invalid("FM", "alpha2 must lie in (0, 1)");
    if (!(alpha1 < alpha2)) invalid("FM", "order constraint alpha1 < alpha2 violated");
}

void FQLVParams::validate() const {
    if (!finite(A) || !(A > 0.0)) invalid("FQLV", "A must be > 0");
    if (!finite(B) || B < 0.0) invalid("FQLV", "B must be >= 0");
    if (!(E >= 0.0 && E <= 1.0)) invalid("FQLV", "E must lie in [0, 1]");
    if (!(alpha > 0.0 && alpha < 1.0)) invalid("FQLV", "alpha must lie in (0, 1)");
}

ModelKind kind_of(const ModelParams& p) {
    return static_cast<ModelKind>(p.index());
}

void validate(const ModelParams& p) {
    std::visit([](const auto& q) { q.validate(); }, p);
}

double relax_sb(const SBParams& p, double t) {
    require_positive_time(t);
    return sb_kernel(p.E, p.alpha, t);
}

double relax_fkv(const FKVParams& p, double t) {
    require_positive_time(t);
    return sb_kernel(p.E1, p.alpha1, t) + sb_kernel(p.E2, p.alpha2, t);
}

double relax_fm(const FMParams& p, double t) {
    require_positive_time(t);
    p.validate();
    const double mu = p.alpha2 - p.alpha1;
    const double arg = -(p.E1 / p.E2) * std::pow(t, mu);
    return p.E1 * std::pow(t, -p.alpha1) * specfun::mittag_leffler(mu, 1.0 - p.alpha1, arg);
}

double relax_fqlv_reduced(const FQLVParams& p, double t) {
    require_positive_time(t);
    return sb_kernel(p.E, p.alpha, t);
}

ElasticResponse elastic_stress(const FQLVParams& p, double strain) {
    const double e = std::exp(p.B * strain);
    return {p.A * std::expm1(p.B * strain), p.A * p.B * e};
}

nlohmann::json to_json(const ModelParams& p) {
    return std::visit(
        [](const auto& q) -> nlohmann::json {
            using T = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<T, SBParams>) {
                return {{"model", "sb"}, {"E_Pa_s_alpha", q.E}, {"alpha", q.alpha}};
            } else if constexpr (std::is_same_v<T, FKVParams>) {
                return {{"model", "fkv"},
                        {"E1_Pa_s_alpha1", q.E1},
                        {"alpha1", q.alpha1},
                        {"E2_Pa_s_alpha2", q.E2},
                        {"alpha2", q.alpha2}};
            } else if constexpr (std::is_same_v<T, FMParams>) {
                return {{"model", "fm"},
                        {"E1_Pa_s_alpha1", q.E1},
                        {"alpha1", q.alpha1},
                        {"E2_Pa_s_alpha2", q.E2},
                        {"alpha2", q.alpha2}};
            } else {
                return {{"model", "fqlv"}, {"A_Pa", q.A}, {"B", q.B}, {"E_s_alpha", q.E}, {"alpha", q.alpha}};
            }
        },
        p);
}

namespace {

double field(const nlohmann::json& j, const char* name) {
    if (!j.contains(name) || !j.at(name).is_number()) {
        throw ConfigError(std::string("parameter JSON: missing numeric field '") + name + "'");
    }
    return j.at(name).get<double>();
}

}  // namespace

ModelParams params_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("model") || !j.at("model").is_string()) {
        throw ConfigError("parameter JSON: expected an object with a string field 'model'");
    }
    ModelParams p;
    switch (parse_model_kind(j.at("model").get<std::string>())) {
        case ModelKind::SB: p = SBParams{field(j, "E_Pa_s_alpha"), field(j, "alpha")}; break;
        case ModelKind::FKV:
            p = FKVParams{field(j, "E1_Pa_s_alpha1"), field(j, "alpha1"), field(j, "E2_Pa_s_alpha2"), field(j, "alpha2")};
            break;
        case ModelKind::FM:
            p = FMParams{field(j, "E1_Pa_s_alpha1"), field(j, "alpha1"), field(j, "E2_Pa_s_alpha2"), field(j, "alpha2")};
            break;
        case ModelKind::FQLV:
            p = FQLVParams{field(j, "A_Pa"), field(j, "B"), field(j, "E_s_alpha"), field(j, "alpha")};
            break;
    }
    validate(p);
    return p;
}

std::vector<double> to_vector(const ModelParams& p) {
    return std::visit(
        [](const auto& q) -> std::vector<double> {
            using T = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<T, SBParams>) {
                return {q.E, q.alpha};
            } else if constexpr (std::is_same_v<T, FQLVParams>) {
                return {q.A, q.B, q.E, q.alpha};
            } else {
                return {q.E1, q.alpha1, q.E2, q.alpha2};
            }
        },
        p);
}

ModelParams from_vector(ModelKind kind, const std::vector<double>& v) {
    if (v.size() != parameter_count(kind)) throw ConfigError("parameter vector has wrong length");
    switch (kind) {
        case ModelKind::SB: return SBParams{v[0], v[1]};
        case ModelKind::FKV: return FKVParams{v[0], v[1], v[2], v[3]};
        case ModelKind::FM: return FMParams{v[0], v[1], v[2], v[3]};
        case ModelKind::FQLV: return FQLVParams{v[0], v[1], v[2], v[3]};
    }
    throw ConfigError("unknown model kind");
}

std::vector<std::string> parameter_names(ModelKind kind) {
    switch (kind) {
        case ModelKind::SB: return {"E_Pa_s_alpha", "alpha"};
        case ModelKind::FKV:
        case ModelKind::FM: return {"E1_Pa_s_alpha1", "alpha1", "E2_Pa_s_alpha2", "alpha2"};
        case ModelKind::FQLV: return {"A_Pa", "B", "E_s_alpha", "alpha"};
    }
    return {};
}

}  // namespace fracvisco::models
