#include <doctest.h>

#include <cmath>

#include "fracvisco/errors.hpp"
#include "fracvisco/models.hpp"
#include "fracvisco/specfun.hpp"

using namespace fracvisco;
using namespace fracvisco::models;

TEST_CASE("kind names round-trip") {
    for (ModelKind k : {ModelKind::SB, ModelKind::FKV, ModelKind::FM, ModelKind::FQLV}) {
        CHECK(parse_model_kind(to_string(k)) == k);
    }
    CHECK(parse_model_kind("FM") == ModelKind::FM);
    CHECK_THROWS_AS(parse_model_kind("maxwell"), ConfigError);
    CHECK(parameter_count(ModelKind::SB) == 2);
    CHECK(parameter_count(ModelKind::FQLV) == 4);
    CHECK(is_linear(ModelKind::FKV));
    CHECK_FALSE(is_linear(ModelKind::FQLV));
}

TEST_CASE("parameter invariants") {
    CHECK_NOTHROW((SBParams{1.0, 0.5}.validate()));
    CHECK_THROWS_AS((SBParams{-1.0, 0.5}.validate()), DomainError);
    CHECK_THROWS_AS((SBParams{1.0, 0.0}.validate()), DomainError);
    CHECK_THROWS_AS((SBParams{1.0, 1.0}.validate()), DomainError);
    CHECK_THROWS_AS((FMParams{1.0, 0.6, 1.0, 0.4}.validate()), DomainError);
    CHECK_THROWS_AS((FMParams{0.0, 0.2, 1.0, 0.4}.validate()), DomainError);
    CHECK_THROWS_AS((FQLVParams{1e4, -0.1, 0.5, 0.3}.validate()), DomainError);
    CHECK_THROWS_AS((FQLVParams{1e4, 1.0, 1.5, 0.3}.validate()), DomainError);
    CHECK_NOTHROW((FKVParams{0.0, 0.3, 2.0, 0.3}.validate()));
    try {
        FMParams{1.0, 0.6, 1.0, 0.4}.validate();
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("alpha1 < alpha2") != std::string::npos);
    }
}

TEST_CASE("Scott-Blair relaxation") {
    const SBParams p{2.0, 0.5};
    CHECK(relax_sb(p, 4.0) == doctest::Approx(2.0 * 0.5 / std::sqrt(M_PI)).epsilon(1e-14));
    CHECK_THROWS_AS(relax_sb(p, 0.0), DomainError);
    // Log-log slope is -alpha.
    const double s = std::log(relax_sb(p, 100.0) / relax_sb(p, 1.0)) / std::log(100.0);
    CHECK(s == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("Kelvin-Voigt is the sum of its branches") {
    const FKVParams p{3.0, 0.2, 5.0, 0.7};
    for (double t : {0.1, 1.0, 50.0}) {
        CHECK(relax_fkv(p, t) ==
              doctest::Approx(relax_sb({3.0, 0.2}, t) + relax_sb({5.0, 0.7}, t)).epsilon(1e-14));
    }
}

TEST_CASE("fractional Maxwell limits") {
    const FMParams p{1000.0, 0.2, 4000.0, 0.8};
    // Short times follow the first element, long times the second.
    CHECK(relax_fm(p, 1e-6) / relax_sb({1000.0, 0.2}, 1e-6) == doctest::Approx(1.0).epsilon(2e-3));
    CHECK(relax_fm(p, 1e7) / relax_sb({4000.0, 0.8}, 1e7) == doctest::Approx(1.0).epsilon(2e-3));
    // Stiff second element recovers SB(E1, alpha1).
    const FMParams stiff{1000.0, 0.3, 1e14, 0.6};
    CHECK(relax_fm(stiff, 10.0) == doctest::Approx(relax_sb({1000.0, 0.3}, 10.0)).epsilon(1e-6));
    // alpha2 = 1: closed form E1 t^-a1 E_{1-a1,1-a1}(-(E1/E2) t^{1-a1}).
    const double t = 2.5;
    const FMParams q{2.0, 0.4, 3.0, 0.9999};
    const double want =
        2.0 * std::pow(t, -0.4) * specfun::mittag_leffler(0.5999, 0.6, -(2.0 / 3.0) * std::pow(t, 0.5999));
    CHECK(relax_fm(q, t) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("FQLV pieces") {
    const FQLVParams p{53882.3, 0.7803, 0.7298, 0.2928};
    const auto e = elastic_stress(p, 0.25);
    CHECK(e.stress == doctest::Approx(53882.3 * std::expm1(0.7803 * 0.25)).epsilon(1e-14));
    CHECK(e.tangent == doctest::Approx(53882.3 * 0.7803 * std::exp(0.7803 * 0.25)).epsilon(1e-14));
    CHECK(elastic_stress(p, 0.0).stress == 0.0);
    CHECK(relax_fqlv_reduced(p, 3.0) == doctest::Approx(relax_sb({0.7298, 0.2928}, 3.0)).epsilon(1e-15));
}

TEST_CASE("JSON and vector round-trips") {
    const ModelParams all[] = {SBParams{18190.1, 0.226}, FKVParams{1.0, 0.2, 2.0, 0.7},
                               FMParams{1.0, 0.2, 4.0, 0.8}, FQLVParams{53882.3, 0.7803, 0.7298, 0.2928}};
    for (const auto& p : all) {
        const auto j = to_json(p);
        const ModelParams q = params_from_json(j);
        CHECK(to_vector(q) == to_vector(p));
        CHECK(kind_of(q) == kind_of(p));
        CHECK(to_vector(from_vector(kind_of(p), to_vector(p))) == to_vector(p));
        CHECK(parameter_names(kind_of(p)).size() == to_vector(p).size());
    }
    CHECK(to_json(SBParams{1.0, 0.5}).contains("E_Pa_s_alpha"));
    nlohmann::json bad = {{"model", "sb"}, {"alpha", 0.5}};
    CHECK_THROWS_AS(params_from_json(bad), ConfigError);
    nlohmann::json inv = {{"model", "sb"}, {"E_Pa_s_alpha", 1.0}, {"alpha", 2.0}};
    CHECK_THROWS_AS(params_from_json(inv), DomainError);
}
