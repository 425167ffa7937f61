#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

namespace fracvisco::pso {

struct Bounds {
    double lo;
    double hi;
};

/// Box-constrained particle swarm settings. Defaults follow the constriction
/// coefficients of Clerc and Kennedy.
struct PsoConfig {
    std::size_t n_pop = 30;
    std::size_t n_iter = 1000;
    std::vector<Bounds> bounds;
    std::uint64_t seed = 1;
    double inertia = 0.7298;
    double cognitive = 1.4962;
    double social = 1.4962;
    /// Worker threads for cost evaluation; 0 = hardware concurrency.
    std::size_t threads = 1;

    void validate() const;
};

nlohmann::json to_json(const PsoConfig& cfg);
/// Reads the fields present in `j` on top of `base`.
PsoConfig pso_config_from_json(const nlohmann::json& j, PsoConfig base = {});

/// Scalar objective over a fixed-dimension box. Must be pure: it may be
/// called concurrently from several threads.
struct CostFunction {
    std::size_t dim = 0;
    std::function<double(std::span<const double>)> fn;
};

struct PsoTrace {
    /// best_cost[0] after initialization, best_cost[i] after iteration i.
    std::vector<double> best_cost;
    std::vector<double> best_position;
    std::size_t evaluations = 0;
};

/// Deterministic for a given seed regardless of the thread count:
/// random draws happen serially, evaluations may run in parallel, and the
/// global best is reduced in particle order with ties going to the lower
/// index. Out-of-box moves are clamped to the bound and that velocity
/// component is zeroed. Non-finite costs count as +inf.
PsoTrace optimize(const CostFunction& cost, const PsoConfig& cfg);

/// CSV "iteration,best_cost".
void write_trace_csv(std::ostream& os, const PsoTrace& trace);

}  // namespace fracvisco::pso
