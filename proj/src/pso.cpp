#include "fracvisco/pso.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "fracvisco/errors.hpp"

namespace fracvisco::pso {

void PsoConfig::validate() const {
    if (n_pop < 2) throw ConfigError("pso: n_pop must be >= 2");
    if (bounds.empty()) throw ConfigError("pso: bounds are empty");
    for (std::size_t d = 0; d < bounds.size(); ++d) {
        if (!std::isfinite(bounds[d].lo) || !std::isfinite(bounds[d].hi) || !(bounds[d].lo < bounds[d].hi)) {
            std::ostringstream os;
            os << "pso: bounds of dimension " << d << " need lo < hi";
            throw ConfigError(os.str());
        }
    }
    if (!(inertia > 0.0) || !(cognitive > 0.0) || !(social > 0.0)) {
        throw ConfigError("pso: inertia, cognitive and social coefficients must be positive");
    }
}

nlohmann::json to_json(const PsoConfig& cfg) {
    nlohmann::json b = nlohmann::json::array();
    for (const auto& x : cfg.bounds) b.push_back({x.lo, x.hi});
    return {{"n_pop", cfg.n_pop},
            {"n_iter", cfg.n_iter},
            {"bounds", b},
            {"seed", cfg.seed},
            {"inertia", cfg.inertia},
            {"cognitive", cfg.cognitive},
            {"social", cfg.social},
            {"threads", cfg.threads},
            {"variant", "global-best, constant inertia, clamp with velocity reset"}};
}

PsoConfig pso_config_from_json(const nlohmann::json& j, PsoConfig cfg) {
    if (!j.is_object()) throw ConfigError("pso config: expected a JSON object");
    try {
        if (j.contains("n_pop")) cfg.n_pop = j.at("n_pop").get<std::size_t>();
        if (j.contains("n_iter")) cfg.n_iter = j.at("n_iter").get<std::size_t>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("inertia")) cfg.inertia = j.at("inertia").get<double>();
        if (j.contains("cognitive")) cfg.cognitive = j.at("cognitive").get<double>();
        if (j.contains("social")) cfg.social = j.at("social").get<double>();
        if (j.contains("threads")) cfg.threads = j.at("threads").get<std::size_t>();
        if (j.contains("bounds")) {
            cfg.bounds.clear();
            for (const auto& b : j.at("bounds")) cfg.bounds.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("pso config: ") + e.what());
    }
    return cfg;
}

namespace {

double sanitize(double c) { return std::isfinite(c) ? c : std::numeric_limits<double>::infinity(); }

void evaluate_all(const CostFunction& cost, const std::vector<std::vector<double>>& x, std::vector<double>& out,
                  std::size_t threads) {
    const std::size_t n = x.size();
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = sanitize(cost.fn(x[i]));
        return;
    }
    std::vector<std::jthread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += threads) out[i] = sanitize(cost.fn(x[i]));
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    pool.clear();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace

PsoTrace optimize(const CostFunction& cost, const PsoConfig& cfg) {
    cfg.validate();
    if (!cost.fn) throw ConfigError("pso: cost function is empty");
    const std::size_t dim = cfg.bounds.size();
    if (cost.dim != dim) {
        std::ostringstream os;
        os << "pso: cost function takes " << cost.dim << " parameters but " << dim << " bounds were given";
        throw ConfigError(os.str());
    }
    std::size_t threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
    threads = std::min(threads, cfg.n_pop);

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const std::size_t np = cfg.n_pop;
    std::vector<std::vector<double>> x(np, std::vector<double>(dim));
    std::vector<std::vector<double>> v(np, std::vector<double>(dim));
    for (std::size_t i = 0; i < np; ++i) {
        for (std::size_t d = 0; d < dim; ++d) {
            const double lo = cfg.bounds[d].lo, hi = cfg.bounds[d].hi;
            x[i][d] = lo + unit(rng) * (hi - lo);
            v[i][d] = (2.0 * unit(rng) - 1.0) * 0.1 * (hi - lo);
        }
    }

    PsoTrace trace;
    std::vector<double> cost_now(np);
    evaluate_all(cost, x, cost_now, threads);
    trace.evaluations += np;

    std::vector<std::vector<double>> pbest = x;
    std::vector<double> pbest_cost = cost_now;
    const auto global_best = [&] {
        std::size_t g = 0;
        for (std::size_t i = 1; i < np; ++i) {
            if (pbest_cost[i] < pbest_cost[g]) g = i;
        }
        return g;
    };
    std::size_t g = global_best();
    std::vector<double> gbest = pbest[g];
    double gbest_cost = pbest_cost[g];
    trace.best_cost.push_back(gbest_cost);

    for (std::size_t it = 0; it < cfg.n_iter; ++it) {
        for (std::size_t i = 0; i < np; ++i) {
            for (std::size_t d = 0; d < dim; ++d) {
                const double lo = cfg.bounds[d].lo, hi = cfg.bounds[d].hi;
                const double r1 = unit(rng), r2 = unit(rng);
                double vel = cfg.inertia * v[i][d] + cfg.cognitive * r1 * (pbest[i][d] - x[i][d]) +
                             cfg.social * r2 * (gbest[d] - x[i][d]);
                const double vmax = hi - lo;
                vel = std::clamp(vel, -vmax, vmax);
                double pos = x[i][d] + vel;
                if (pos < lo) {
                    pos = lo;
                    vel = 0.0;
                } else if (pos > hi) {
                    pos = hi;
                    vel = 0.0;
                }
                x[i][d] = pos;
                v[i][d] = vel;
            }
        }
        evaluate_all(cost, x, cost_now, threads);
        trace.evaluations += np;
        for (std::size_t i = 0; i < np; ++i) {
            if (cost_now[i] < pbest_cost[i]) {
                pbest_cost[i] = cost_now[i];
                pbest[i] = x[i];
            }
        }
        g = global_best();
        if (pbest_cost[g] < gbest_cost) {
            gbest_cost = pbest_cost[g];
            gbest = pbest[g];
        }
        trace.best_cost.push_back(gbest_cost);
    }
    trace.best_position = gbest;
    return trace;
}

void write_trace_csv(std::ostream& os, const PsoTrace& trace) {
    os << "iteration,best_cost\n" << std::setprecision(17);
    for (std::size_t i = 0; i < trace.best_cost.size(); ++i) os << i << ',' << trace.best_cost[i] << '\n';
}

}  // namespace fracvisco::pso
