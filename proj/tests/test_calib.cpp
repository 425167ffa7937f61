#include <doctest.h>

#include <cmath>
#include <random>

#include "fracvisco/calib.hpp"
#include "fracvisco/errors.hpp"

using namespace fracvisco;
using namespace fracvisco::calib;
using models::ModelKind;

namespace {

const l1::UniformGrid kGrid(0.0, 0.1, 1200);
const l1::StrainProtocol kTwoSteps{{{0.0, 0.25}, {60.0, 0.5}}, 0.0};

pso::PsoConfig quick(ModelKind k, std::size_t n_iter, std::uint64_t seed = 3) {
    pso::PsoConfig c = default_pso(k);
    c.n_iter = n_iter;
    c.seed = seed;
    return c;
}

FitOptions opts() { return FitOptions{kGrid.dt, 1, true}; }

}  // namespace

TEST_CASE("cost and metrics") {
    const std::vector<double> d(100, 3.0), m(100, 2.0);
    CHECK(cost_fn(d, d) == 0.0);
    CHECK(cost_fn(d, m) == doctest::Approx(100.0));
    std::vector<double> d5(100, 15.0), m5(100, 10.0);
    CHECK(cost_fn(d5, m5) == doctest::Approx(25.0 * cost_fn(d, m)));
    CHECK_THROWS_AS(cost_fn(d, std::vector<double>(99, 1.0)), DataError);

    CHECK(lse(d, d) == 0.0);
    CHECK(rmse(d, d) == 0.0);
    CHECK(lse(d, std::vector<double>(100, 0.0)) == doctest::Approx(100.0));
    CHECK(lse(d5, m5) == doctest::Approx(lse(d, m)));
    CHECK_THROWS_AS(lse(std::vector<double>(5, 0.0), std::vector<double>(5, 1.0)), DataError);
    CHECK_THROWS_AS(rmse(std::vector<double>(5, 0.0), std::vector<double>(5, 1.0)), DataError);

    // rmse = lse * ||d|| / (max(d) sqrt(N)).
    std::vector<double> a, b;
    for (int i = 0; i < 40; ++i) {
        a.push_back(1.0 + std::sin(0.3 * i));
        b.push_back(1.0 + std::sin(0.3 * i + 0.1));
    }
    double norm = 0.0;
    for (double v : a) norm += v * v;
    const double peak = *std::max_element(a.begin(), a.end());
    CHECK(rmse(a, b) == doctest::Approx(lse(a, b) * std::sqrt(norm) / (peak * std::sqrt(40.0))).epsilon(1e-12));
}

TEST_CASE("defaults") {
    const auto b = default_bounds(ModelKind::FQLV);
    REQUIRE(b.size() == 4);
    CHECK(b[0].lo == 1e4);
    CHECK(b[0].hi == 1e5);
    CHECK(b[1].hi == 2.0);
    CHECK(default_bounds(ModelKind::FM)[2].hi == 1e8);
    CHECK(default_bounds(ModelKind::SB)[1].lo == 1e-4);
    CHECK(default_pso(ModelKind::SB).n_iter == 1000);
    CHECK(default_pso(ModelKind::FQLV).n_iter == 100);
    CHECK(default_pso(ModelKind::FKV).n_pop == 30);
}

TEST_CASE("search coordinates cover the physical box exactly") {
    const auto dims = search_space(ModelKind::FM, default_bounds(ModelKind::FM), true);
    CHECK(dims[0].scale == SearchScale::Log);
    CHECK(dims[1].scale == SearchScale::Linear);
    CHECK(dims[0].to_physical(0.0) == 0.0);
    CHECK(dims[0].to_physical(1.0) == doctest::Approx(1e8));
    for (double x : {0.0, 1.0, 18190.1, 3e6, 1e8}) CHECK(dims[0].to_physical(dims[0].to_swarm(x)) == doctest::Approx(x));
    // Each decade of the pseudo-constant gets a comparable share of the swarm box.
    CHECK(dims[0].to_swarm(1e4) == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(search_space(ModelKind::FQLV, default_bounds(ModelKind::FQLV), true)[0].scale == SearchScale::Linear);
    CHECK(search_space(ModelKind::SB, default_bounds(ModelKind::SB), false)[0].scale == SearchScale::Linear);
}

TEST_CASE("fit windows") {
    const auto rec = synthesize_record(models::SBParams{1000.0, 0.3}, kTwoSteps, kGrid);
    const auto w = fit_window(rec, ModelKind::SB);
    CHECK(w.stress.time.back() < 60.0);
    CHECK(w.stress.time.back() > 59.0);
    CHECK(w.protocol.steps.size() == 1);
    CHECK(fit_window(rec, ModelKind::FQLV).stress.size() == rec.stress.size());
    data::ExperimentRecord empty;
    CHECK_THROWS_AS(fit_window(empty, ModelKind::SB), DataError);
}

TEST_CASE("Scott-Blair self-consistency") {
    const models::SBParams truth{30000.0, 0.25};
    const auto rec = synthesize_record(truth, kTwoSteps, kGrid);
    const FitResult r = fit(rec, ModelKind::SB, quick(ModelKind::SB, 300), opts());
    const auto& p = std::get<models::SBParams>(r.params);
    CHECK(p.alpha == doctest::Approx(0.25).epsilon(1e-3 / 0.25));
    CHECK(p.E == doctest::Approx(30000.0).epsilon(1e-3));
    CHECK(r.rmse_percent < 0.1);
    CHECK(r.residual.size() == r.data_stress.size());
    CHECK(r.trace.best_cost.size() == 301);
    CHECK(r.window == "first_step");
    const auto j = to_json(r);
    CHECK(j["model"] == "sb");
    CHECK(j["params_table_units"]["E_kPa_s_alpha"] == doctest::Approx(30.0).epsilon(1e-3));
    CHECK(j["search_scale"][0] == "log");

    // The model response helper reproduces the fitted stress.
    const auto w = fit_window(rec, ModelKind::SB);
    const auto m = model_response(r.params, w, kGrid.dt);
    CHECK(m.value.back() == doctest::Approx(r.model_stress.value.back()));
}

TEST_CASE("Kelvin-Voigt on Scott-Blair data reaches cost parity") {
    const auto rec = synthesize_record(models::SBParams{30000.0, 0.25}, kTwoSteps, kGrid);
    const FitResult sb = fit(rec, ModelKind::SB, quick(ModelKind::SB, 300), opts());
    const FitResult fkv = fit(rec, ModelKind::FKV, quick(ModelKind::FKV, 600), opts());
    CHECK(fkv.rmse_percent < 0.1);
    CHECK(std::abs(fkv.rmse_percent - sb.rmse_percent) < 0.25);
}

TEST_CASE("Maxwell self-consistency") {
    const models::FMParams truth{1000.0, 0.2, 4000.0, 0.8};
    const auto rec = synthesize_record(truth, kTwoSteps, kGrid);
    const FitResult r = fit(rec, ModelKind::FM, quick(ModelKind::FM, 600), opts());
    CHECK(r.rmse_percent < 0.1);
}

TEST_CASE("noise changes recovered orders only slightly") {
    const models::SBParams truth{30000.0, 0.25};
    auto rec = synthesize_record(truth, kTwoSteps, kGrid);
    const double peak = *std::max_element(rec.stress.value.begin(), rec.stress.value.end());
    std::mt19937_64 rng(99);
    std::normal_distribution<double> noise(0.0, 0.01 * peak);
    for (std::size_t i = 1; i < rec.stress.value.size(); ++i) rec.stress.value[i] += noise(rng);
    const FitResult r = fit(rec, ModelKind::SB, quick(ModelKind::SB, 300), opts());
    CHECK(std::abs(std::get<models::SBParams>(r.params).alpha - 0.25) < 0.02);
}

TEST_CASE("fit failures") {
    const auto rec = synthesize_record(models::SBParams{1000.0, 0.3}, kTwoSteps, kGrid);
    pso::PsoConfig c = quick(ModelKind::FM, 5);
    c.bounds = {{1.0, 10.0}, {0.6, 0.9}, {1.0, 10.0}, {0.1, 0.5}};  // alpha1 < alpha2 impossible
    CHECK_THROWS_AS(fit(rec, ModelKind::FM, c, opts()), FitError);
    c.bounds.pop_back();
    CHECK_THROWS_AS(fit(rec, ModelKind::FM, c, opts()), ConfigError);
    auto shifted = rec;
    for (double& e : shifted.strain.value) e += 0.01;
    CHECK_THROWS_AS(fit(shifted, ModelKind::SB, quick(ModelKind::SB, 5), opts()), DataError);
}

TEST_CASE("restarts keep the best run") {
    const auto rec = synthesize_record(models::SBParams{1000.0, 0.3}, kTwoSteps, kGrid);
    const FitResult one = fit(rec, ModelKind::SB, quick(ModelKind::SB, 10, 5), opts());
    const FitResult three = fit(rec, ModelKind::SB, quick(ModelKind::SB, 10, 5), FitOptions{kGrid.dt, 3, true});
    CHECK(three.cost <= one.cost);
    CHECK(three.seed >= 5);
    CHECK(three.seed <= 7);
}

TEST_CASE("ranking tie-break") {
    const auto row = [](ModelKind k, double rmse) {
        ReportRow r;
        r.kind = k;
        r.n_params = models::parameter_count(k);
        r.fit = FitResult{};
        r.fit->rmse_percent = rmse;
        return r;
    };
    // FKV marginally better than SB: parity, SB wins on parameter count.
    std::vector<ReportRow> rows = {row(ModelKind::SB, 1.10), row(ModelKind::FKV, 1.00), row(ModelKind::FM, 0.50)};
    auto order = rank_rows(rows, 0.25);
    CHECK(order == std::vector<std::size_t>{2, 0, 1});
    rows[2].fit->rmse_percent = 0.95;  // FM within margin of FKV and SB
    order = rank_rows(rows, 0.25);
    CHECK(order.front() == 0);
    ReportRow failed;
    failed.kind = ModelKind::FM;
    failed.error = "boom";
    rows[2] = failed;
    order = rank_rows(rows, 0.25);
    CHECK(order.back() == 2);
}

TEST_CASE("existence report on Scott-Blair data") {
    const auto rec = synthesize_record(models::SBParams{30000.0, 0.25},
                                       {{{0.0, 0.25}, {600.0, 0.5}}, 0.5}, l1::UniformGrid(0.0, 0.05, 14000));
    ReportOptions o;
    o.fit = FitOptions{0.5, 1, true};
    o.linear_pso = quick(ModelKind::SB, 300);
    o.fqlv_pso = quick(ModelKind::FQLV, 10);
    o.modulus.onset_skip = 20;
    const ExistenceReport rep = existence_report(rec, o);
    REQUIRE(rep.linear.size() == 3);
    CHECK(rep.linear.front().kind == ModelKind::SB);
    CHECK(rep.recommendation.family == data::ModelFamily::SB);
    REQUIRE(rep.fqlv.has_value());
    CHECK(rep.fqlv->fit.has_value());
    const auto j = to_json(rep);
    CHECK(j["selected"] == "sb");
    CHECK(j["linear_ranking"].size() == 3);
    const std::string table = render_table(rep);
    CHECK(table.find("Rank") != std::string::npos);
    CHECK(table.find("FQLV") != std::string::npos);
    data::ExperimentRecord empty;
    CHECK_THROWS_AS(existence_report(empty, o), DataError);
}
