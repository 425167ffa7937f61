#include "fracvisco/calib.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "fracvisco/errors.hpp"

namespace fracvisco::calib {

using models::ModelKind;

namespace {

std::string kind_name(ModelKind k) { return std::string(models::to_string(k)); }
std::string family_name(data::ModelFamily f) { return std::string(data::to_string(f)); }

void require_same_length(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        std::ostringstream os;
        os << "metric: data and model lengths differ (" << a.size() << " vs " << b.size() << ")";
        throw DataError(os.str());
    }
}

double sum_squares(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

}  // namespace

double cost_fn(std::span<const double> data, std::span<const double> model) {
    require_same_length(data, model);
    double s = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double r = data[i] - model[i];
        s += r * r;
    }
    return s;
}

double lse(std::span<const double> data, std::span<const double> model) {
    const double ssr = cost_fn(data, model);
    const double norm = sum_squares(data);
    if (!(norm > 0.0)) throw DataError("LSE undefined: data stress is identically zero");
    return std::sqrt(ssr) / std::sqrt(norm) * 100.0;
}

double rmse(std::span<const double> data, std::span<const double> model) {
    const double ssr = cost_fn(data, model);
    if (data.empty()) throw DataError("RMSE undefined: no samples");
    const double peak = *std::max_element(data.begin(), data.end());
    if (!(peak > 0.0)) throw DataError("RMSE undefined: max(data stress) is not positive");
    return std::sqrt(ssr / static_cast<double>(data.size())) / peak * 100.0;
}

std::vector<pso::Bounds> default_bounds(ModelKind kind) {
    const pso::Bounds pseudo{0.0, 1e8};
    const pso::Bounds order{1e-4, 0.9999};
    switch (kind) {
        case ModelKind::SB: return {pseudo, order};
        case ModelKind::FKV:
        case ModelKind::FM: return {pseudo, order, pseudo, order};
        case ModelKind::FQLV: return {{1e4, 1e5}, {0.0, 2.0}, {0.0, 1.0}, order};
    }
    return {};
}

pso::PsoConfig default_pso(ModelKind kind) {
    pso::PsoConfig cfg;
    cfg.n_pop = 30;
    cfg.n_iter = kind == ModelKind::FQLV ? 100 : 1000;
    cfg.bounds = default_bounds(kind);
    return cfg;
}

pso::Bounds SearchDim::swarm_bounds() const {
    return scale == SearchScale::Log ? pso::Bounds{0.0, 1.0} : bounds;
}

double SearchDim::to_physical(double u) const {
    if (scale == SearchScale::Linear) return u;
    const double g = std::expm1(kPseudoDecades * std::log(10.0) * u) / std::expm1(kPseudoDecades * std::log(10.0));
    return std::clamp(bounds.lo + (bounds.hi - bounds.lo) * g, bounds.lo, bounds.hi);
}

double SearchDim::to_swarm(double x) const {
    if (scale == SearchScale::Linear) return x;
    const double g = (x - bounds.lo) / (bounds.hi - bounds.lo);
    return std::clamp(std::log1p(g * std::expm1(kPseudoDecades * std::log(10.0))) / (kPseudoDecades * std::log(10.0)),
                      0.0, 1.0);
}

std::vector<SearchDim> search_space(ModelKind kind, const std::vector<pso::Bounds>& bounds, bool log_pseudo_constants) {
    std::vector<SearchDim> dims;
    for (std::size_t i = 0; i < bounds.size(); ++i) {
        // Pseudo-constants sit at even indices of the linear models.
        const bool pseudo = models::is_linear(kind) && i % 2 == 0;
        dims.push_back({bounds[i], pseudo && log_pseudo_constants ? SearchScale::Log : SearchScale::Linear});
    }
    return dims;
}

data::ExperimentRecord fit_window(const data::ExperimentRecord& rec, ModelKind kind) {
    if (rec.stress.empty()) throw DataError("fit: record is empty");
    if (rec.protocol.steps.empty()) throw DataError("fit: record has no protocol steps");
    if (!models::is_linear(kind) || rec.protocol.steps.size() < 2) return rec;
    const double end = rec.protocol.steps[1].onset;
    const auto& t = rec.stress.time;
    const auto n = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), end) - t.begin());
    data::ExperimentRecord w = rec;
    const auto cut = [n](data::TimeSeries& s) {
        s.time.resize(std::min(n, s.time.size()));
        s.value.resize(std::min(n, s.value.size()));
    };
    cut(w.stress);
    cut(w.strain);
    if (w.force) cut(*w.force);
    if (w.area) cut(*w.area);
    w.protocol.steps.resize(1);
    return w;
}

l1::GridSeries uniform_strain(const data::ExperimentRecord& window, double dt) {
    l1::GridSeries eps = data::resample_to_uniform(window.strain, dt, data::Extrapolation::HoldLast);
    const double e0 = eps.values.front();
    if (std::abs(e0) > 1e-6) {
        std::ostringstream os;
        os << "fit: strain at the first sample must be zero (got " << e0 << ")";
        throw DataError(os.str());
    }
    eps.values.front() = 0.0;
    return eps;
}

namespace {

// Precomputed linear interpolation from grid nodes to sample times.
class GridToSamples {
public:
    GridToSamples(const l1::UniformGrid& g, std::span<const double> times) : k_(times.size()), w_(times.size()) {
        for (std::size_t i = 0; i < times.size(); ++i) {
            const double pos = std::clamp((times[i] - g.t0) / g.dt, 0.0, static_cast<double>(g.n_steps));
            auto k = static_cast<std::size_t>(std::floor(pos));
            if (k >= g.n_steps) k = g.n_steps - 1;
            k_[i] = k;
            w_[i] = pos - static_cast<double>(k);
        }
    }

    void map(const std::vector<double>& grid_values, std::vector<double>& out) const {
        out.resize(k_.size());
        for (std::size_t i = 0; i < k_.size(); ++i) {
            const double a = grid_values[k_[i]];
            const double b = grid_values[k_[i] + 1];
            out[i] = w_[i] == 0.0 ? a : (w_[i] == 1.0 ? b : a + w_[i] * (b - a));
        }
    }

private:
    std::vector<std::size_t> k_;
    std::vector<double> w_;
};

}  // namespace

data::TimeSeries model_response(const models::ModelParams& params, const data::ExperimentRecord& window, double dt) {
    const l1::GridSeries eps = uniform_strain(window, dt);
    const l1::GridSeries sigma = l1::simulate(params, eps);
    data::TimeSeries out = data::resample_to_nonuniform(sigma, window.stress.time);
    out.unit = "Pa";
    return out;
}

FitResult fit(const data::ExperimentRecord& rec, ModelKind kind, const pso::PsoConfig& cfg_in, const FitOptions& opts) {
    if (!(opts.dt > 0.0)) throw ConfigError("fit: dt must be > 0");
    if (opts.restarts < 1) throw ConfigError("fit: restarts must be >= 1");
    pso::PsoConfig cfg = cfg_in;
    if (cfg.bounds.empty()) cfg.bounds = default_bounds(kind);
    if (cfg.bounds.size() != models::parameter_count(kind)) {
        std::ostringstream os;
        os << "fit: " << kind_name(kind) << " has " << models::parameter_count(kind)
           << " parameters but " << cfg.bounds.size() << " bounds were given";
        throw ConfigError(os.str());
    }

    const data::ExperimentRecord window = fit_window(rec, kind);
    const l1::GridSeries eps = uniform_strain(window, opts.dt);
    const GridToSamples mapper(eps.grid, window.stress.time);
    const std::vector<double>& target = window.stress.value;
    const std::vector<SearchDim> dims = search_space(kind, cfg.bounds, opts.log_pseudo_constants);
    const auto physical = [&dims](std::span<const double> u) {
        std::vector<double> x(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) x[i] = dims[i].to_physical(u[i]);
        return x;
    };
    pso::PsoConfig swarm = cfg;
    for (std::size_t i = 0; i < dims.size(); ++i) swarm.bounds[i] = dims[i].swarm_bounds();

    pso::CostFunction cost;
    cost.dim = cfg.bounds.size();
    cost.fn = [&](std::span<const double> u) -> double {
        const models::ModelParams p = models::from_vector(kind, physical(u));
        try {
            models::validate(p);
        } catch (const DomainError&) {
            return std::numeric_limits<double>::infinity();
        }
        const l1::GridSeries sigma = l1::simulate(p, eps);
        std::vector<double> mapped;
        mapper.map(sigma.values, mapped);
        return cost_fn(target, mapped);
    };

    FitResult best;
    best.cost = std::numeric_limits<double>::infinity();
    bool have = false;
    for (std::size_t r = 0; r < opts.restarts; ++r) {
        pso::PsoConfig c = swarm;
        c.seed = cfg.seed + r;
        pso::PsoTrace trace = pso::optimize(cost, c);
        trace.best_position = physical(trace.best_position);
        const double final_cost = trace.best_cost.back();
        if (!have || final_cost < best.cost) {
            have = true;
            best.cost = final_cost;
            best.trace = std::move(trace);
            best.seed = c.seed;
        }
    }
    if (!std::isfinite(best.cost)) {
        throw FitError("fit: " + kind_name(kind) + " produced no finite cost over the search box");
    }

    best.kind = kind;
    best.params = models::from_vector(kind, best.trace.best_position);
    best.dt = opts.dt;
    best.bounds = cfg.bounds;
    best.pso = cfg;
    best.restarts = opts.restarts;
    best.search = dims;
    best.window = models::is_linear(kind) && rec.protocol.steps.size() > 1 ? "first_step" : "all_steps";
    best.data_stress = window.stress;
    best.model_stress.time = window.stress.time;
    best.model_stress.unit = "Pa";
    mapper.map(l1::simulate(best.params, eps).values, best.model_stress.value);
    best.residual.time = window.stress.time;
    best.residual.unit = "Pa";
    best.residual.value.resize(target.size());
    for (std::size_t i = 0; i < target.size(); ++i) best.residual.value[i] = target[i] - best.model_stress.value[i];
    best.lse_percent = lse(target, best.model_stress.value);
    best.rmse_percent = rmse(target, best.model_stress.value);
    return best;
}

namespace {

nlohmann::json bounds_json(const std::vector<pso::Bounds>& b) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& x : b) j.push_back({x.lo, x.hi});
    return j;
}

nlohmann::json search_json(const std::vector<SearchDim>& dims) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& d : dims) j.push_back(d.scale == SearchScale::Log ? "log" : "linear");
    return j;
}

// Parameters in the units of the published tables (kPa s^alpha, kPa).
nlohmann::json table_units(const models::ModelParams& p) {
    nlohmann::json j = models::to_json(p);
    for (const char* k : {"E_Pa_s_alpha", "E1_Pa_s_alpha1", "E2_Pa_s_alpha2", "A_Pa"}) {
        if (j.contains(k)) {
            std::string name(k);
            name.replace(name.find("_Pa"), 3, "_kPa");
            j[name] = j.at(k).get<double>() / 1000.0;
            j.erase(k);
        }
    }
    return j;
}

}  // namespace

nlohmann::json to_json(const FitResult& r) {
    return {{"model", kind_name(r.kind)},
            {"params", models::to_json(r.params)},
            {"params_table_units", table_units(r.params)},
            {"cost_Pa2", r.cost},
            {"lse_percent", r.lse_percent},
            {"rmse_percent", r.rmse_percent},
            {"dt_s", r.dt},
            {"seed", r.seed},
            {"restarts", r.restarts},
            {"bounds", bounds_json(r.bounds)},
            {"pso", pso::to_json(r.pso)},
            {"search_scale", search_json(r.search)},
            {"window", r.window},
            {"samples", r.data_stress.size()},
            {"evaluations", r.trace.evaluations},
            {"metrics_computed_on", "filtered stress of the fit window"}};
}

std::vector<std::size_t> rank_rows(const std::vector<ReportRow>& rows, double margin_pp) {
    std::vector<std::size_t> ok, failed;
    for (std::size_t i = 0; i < rows.size(); ++i) (rows[i].fit ? ok : failed).push_back(i);
    std::vector<std::size_t> order;
    while (!ok.empty()) {
        const auto rmse_of = [&](std::size_t i) { return rows[i].fit->rmse_percent; };
        const double best = rmse_of(*std::min_element(ok.begin(), ok.end(), [&](auto a, auto b) {
            return rmse_of(a) < rmse_of(b) || (rmse_of(a) == rmse_of(b) && a < b);
        }));
        auto pick = ok.end();
        for (auto it = ok.begin(); it != ok.end(); ++it) {
            if (rmse_of(*it) >= best + margin_pp) continue;
            if (pick == ok.end()) {
                pick = it;
                continue;
            }
            const auto& a = rows[*it];
            const auto& b = rows[*pick];
            if (a.n_params < b.n_params || (a.n_params == b.n_params && rmse_of(*it) < rmse_of(*pick))) pick = it;
        }
        order.push_back(*pick);
        ok.erase(pick);
    }
    order.insert(order.end(), failed.begin(), failed.end());
    return order;
}

namespace {

std::string verdict(ModelKind kind, data::ModelFamily family) {
    if (family == data::ModelFamily::InsufficientData) return "n/a";
    const bool match = (kind == ModelKind::SB && family == data::ModelFamily::SB) ||
                       (kind == ModelKind::FM && family == data::ModelFamily::FMFamily) ||
                       (kind == ModelKind::FKV && family == data::ModelFamily::FKVFamily);
    return match ? "consistent" : "inconsistent";
}

ReportRow run_row(const data::ExperimentRecord& rec, ModelKind kind, const pso::PsoConfig& cfg,
                  const FitOptions& opts, data::ModelFamily family) {
    ReportRow row;
    row.kind = kind;
    row.n_params = models::parameter_count(kind);
    row.slope_verdict = kind == ModelKind::FQLV ? "n/a" : verdict(kind, family);
    pso::PsoConfig c = cfg;
    c.bounds = default_bounds(kind);
    try {
        row.fit = fit(rec, kind, c, opts);
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

}  // namespace

ExistenceReport existence_report(const data::ExperimentRecord& rec, const ReportOptions& opts) {
    if (rec.stress.empty() || rec.protocol.steps.empty()) throw DataError("existence report: empty record");
    ExistenceReport rep;
    rep.options = opts;
    rep.modulus = data::estimate_modulus(rec, opts.modulus);
    rep.recommendation = data::recommend_model(rep.modulus, opts.slope_tol);
    const auto family = rep.recommendation.family;

    const ModelKind linear[] = {ModelKind::SB, ModelKind::FKV, ModelKind::FM};
    std::vector<ReportRow> rows;
    if (opts.parallel) {
        std::vector<std::future<ReportRow>> jobs;
        for (ModelKind k : linear) {
            jobs.push_back(std::async(std::launch::async, run_row, std::cref(rec), k, std::cref(opts.linear_pso),
                                      std::cref(opts.fit), family));
        }
        std::future<ReportRow> fq;
        if (opts.include_fqlv) {
            fq = std::async(std::launch::async, run_row, std::cref(rec), ModelKind::FQLV, std::cref(opts.fqlv_pso),
                            std::cref(opts.fit), family);
        }
        for (auto& j : jobs) rows.push_back(j.get());
        if (opts.include_fqlv) rep.fqlv = fq.get();
    } else {
        for (ModelKind k : linear) rows.push_back(run_row(rec, k, opts.linear_pso, opts.fit, family));
        if (opts.include_fqlv) rep.fqlv = run_row(rec, ModelKind::FQLV, opts.fqlv_pso, opts.fit, family);
    }
    for (std::size_t i : rank_rows(rows, opts.tie_margin_pp)) rep.linear.push_back(std::move(rows[i]));
    return rep;
}

namespace {

nlohmann::json row_json(const ReportRow& row, std::optional<std::size_t> rank) {
    nlohmann::json j = {{"model", kind_name(row.kind)},
                        {"n_params", row.n_params},
                        {"slope_verdict", row.slope_verdict}};
    if (rank) j["rank"] = *rank;
    if (row.fit) {
        j["fit"] = to_json(*row.fit);
    } else {
        j["error"] = row.error;
    }
    return j;
}

nlohmann::json slope_summary(const data::SlopeFit& s) {
    if (!s.available) return nullptr;
    return {{"slope", s.slope}, {"std_error", s.std_error}};
}

}  // namespace

nlohmann::json to_json(const ExistenceReport& r) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < r.linear.size(); ++i) rows.push_back(row_json(r.linear[i], i + 1));
    nlohmann::json j = {{"recommendation",
                         {{"family", family_name(r.recommendation.family)},
                          {"rationale", r.recommendation.rationale},
                          {"beta1", slope_summary(r.recommendation.beta1)},
                          {"beta2", slope_summary(r.recommendation.beta2)}}},
                        {"linear_ranking", rows},
                        {"selected", r.linear.empty() ? "" : kind_name(r.linear.front().kind)},
                        {"tie_margin_pp", r.options.tie_margin_pp},
                        {"slope_tol", r.options.slope_tol}};
    j["fqlv"] = r.fqlv ? row_json(*r.fqlv, std::nullopt) : nlohmann::json(nullptr);
    return j;
}

std::string render_table(const ExistenceReport& r) {
    std::ostringstream os;
    const auto num = [](double v, int prec) {
        std::ostringstream s;
        s << std::setprecision(prec) << v;
        return s.str();
    };
    const auto fixed = [](double v) {
        std::ostringstream s;
        s << std::fixed << std::setprecision(2) << v;
        return s.str();
    };
    os << "Slope analysis: " << r.recommendation.rationale << "\n";
    os << "Recommended family: " << family_name(r.recommendation.family) << "\n\n";
    os << "Linear models (first relaxation step)\n";
    os << std::left << std::setw(6) << "Rank" << std::setw(7) << "Model" << std::right << std::setw(14)
       << "E1[kPa.s^a1]" << std::setw(9) << "alpha1" << std::setw(14) << "E2[kPa.s^a2]" << std::setw(9) << "alpha2"
       << std::setw(9) << "LSE%" << std::setw(9) << "RMSE%" << std::setw(8) << "params"
       << "  slopes\n";
    for (std::size_t i = 0; i < r.linear.size(); ++i) {
        const auto& row = r.linear[i];
        os << std::left << std::setw(6) << (i + 1) << std::setw(7) << kind_name(row.kind) << std::right;
        if (!row.fit) {
            os << "  fit failed: " << row.error << "\n";
            continue;
        }
        const auto v = models::to_vector(row.fit->params);
        os << std::setw(14) << num(v[0] / 1000.0, 6) << std::setw(9) << num(v[1], 3);
        if (v.size() == 4) {
            os << std::setw(14) << num(v[2] / 1000.0, 6) << std::setw(9) << num(v[3], 3);
        } else {
            os << std::setw(14) << "--" << std::setw(9) << "--";
        }
        os << std::setw(9) << fixed(row.fit->lse_percent) << std::setw(9) << fixed(row.fit->rmse_percent)
           << std::setw(8) << row.n_params << "  " << row.slope_verdict << "\n";
    }
    if (r.fqlv) {
        os << "\nFQLV (all steps)\n";
        os << std::right << std::setw(10) << "A[kPa]" << std::setw(9) << "B" << std::setw(10) << "E[s^a]"
           << std::setw(9) << "alpha" << std::setw(9) << "LSE%" << std::setw(9) << "RMSE%" << "\n";
        if (r.fqlv->fit) {
            const auto v = models::to_vector(r.fqlv->fit->params);
            os << std::setw(10) << num(v[0] / 1000.0, 6) << std::setw(9) << num(v[1], 4) << std::setw(10)
               << num(v[2], 4) << std::setw(9) << num(v[3], 4) << std::setw(9) << fixed(r.fqlv->fit->lse_percent)
               << std::setw(9) << fixed(r.fqlv->fit->rmse_percent) << "\n";
        } else {
            os << "  fit failed: " << r.fqlv->error << "\n";
        }
    }
    return os.str();
}

data::ExperimentRecord synthesize_record(const models::ModelParams& params, const l1::StrainProtocol& proto,
                                         const l1::UniformGrid& grid) {
    models::validate(params);
    const l1::RasterizedStrain eps = l1::rasterize_protocol(proto, grid);
    const l1::GridSeries sigma = l1::simulate(params, eps.strain);
    data::ExperimentRecord rec;
    rec.sample_id = "synthetic-" + std::string(kind_name(models::kind_of(params)));
    rec.stress = {grid.times(), sigma.values, "Pa"};
    rec.strain = {grid.times(), eps.strain.values, "1"};
    rec.protocol = proto;
    // Onsets as realized on the grid.
    for (const auto& s : eps.snapped) rec.protocol.steps[s.step].onset = s.snapped;
    rec.metadata = {{"source", "synthetic"}, {"params", models::to_json(params)}, {"dt_s", grid.dt}};
    return rec;
}

}  // namespace fracvisco::calib
