#include "adiabat/oracle.hpp"

#include <doctest.h>

#include <functional>

using namespace adiabat;

namespace {

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

IntegrationSettings real_axis()
{
    IntegrationSettings s;
    s.path = OraclePath::real_axis;
    return s;
}

ErrorCode code_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::validation;
}

// planar, not symmetric under s -> -s
FieldProfile skewed(double sign)
{
    std::string bx = sign > 0 ? "0.8/(1+s^2) + 0.3*s/(1+s^2)^2" : "0.8/(1+s^2) - 0.3*s/(1+s^2)^2";
    return FieldProfile::custom(parse(bx), parse("0"), parse("1"));
}

} // namespace

TEST_SUITE("oracle")
{
    TEST_CASE("zero coupling")
    {
        auto f = FieldProfile::berman(parse("0"), 1.0);
        for (auto rep : {Representation::a12, Representation::a_pm}) {
            auto tr = integrate_amplitude_system(f, 5.0, real_axis(), rep);
            REQUIRE_FALSE(tr.samples.empty());
            for (const auto& smp : tr.samples) CHECK(std::abs(smp.a2) == 0.0);
            CHECK(extract_a_minus(tr, f, 5.0).P == 0.0);
        }
        CHECK(oracle_probability(f, 5.0).P == 0.0);
    }

    TEST_CASE("norm conservation on the real axis")
    {
        auto f = FieldProfile::nikitin(1, 2, 1);
        for (double T : {5.0, 40.0}) {
            auto tr = integrate_amplitude_system(f, T, real_axis(), Representation::a12);
            CHECK(tr.max_norm_drift <= 1e-9);
            for (const auto& smp : tr.samples) CHECK(std::fabs(smp.norm - 1.0) <= 1e-9);
            CHECK(std::fabs(std::norm(tr.a1) + std::norm(tr.a2) - 1.0) <= 1e-9);
            CHECK(tr.samples.front().s.real() == doctest::Approx(-50.0));
            CHECK(tr.samples.back().s.real() == doctest::Approx(50.0));
        }
    }

    TEST_CASE("representations agree")
    {
        auto f = FieldProfile::nikitin(1, 2, 1);
        for (double T : {5.0, 10.0}) {
            auto a = extract_a_minus(integrate_amplitude_system(f, T, real_axis(), Representation::a12), f, T);
            auto b = extract_a_minus(integrate_amplitude_system(f, T, real_axis(), Representation::a_pm), f, T);
            auto c = oracle_probability(f, T);
            CHECK(std::fabs(a.P - b.P) <= 1e-8);
            CHECK(std::fabs(a.P - c.P) <= 1e-8);
        }
        // where the real-axis runs still resolve a- to several digits
        auto a = extract_a_minus(integrate_amplitude_system(f, 5.0, real_axis(), Representation::a12), f, 5.0);
        CHECK(rel(a.P, oracle_probability(f, 5.0).P) <= 1e-6);
    }

    TEST_CASE("time reversal of a planar field")
    {
        for (double T : {2.0, 3.0}) {
            double P = oracle_probability(skewed(1), T).P;
            double Q = oracle_probability(skewed(-1), T).P;
            CHECK(P > 1e-4);
            CHECK(std::fabs(P - Q) <= 1e-8);
        }
    }

    TEST_CASE("regression baseline")
    {
        auto r = oracle_probability(FieldProfile::nikitin(1, 2, 1), 20.0);
        CHECK(r.method == Method::oracle);
        CHECK(rel(r.P, 3.9246947929e-31) <= 1e-9);
    }

    TEST_CASE("halving the tolerances")
    {
        auto check = [](const FieldProfile& f, double T) {
            IntegrationSettings a, b;
            b.rel_tol = a.rel_tol / 2;
            b.abs_tol = a.abs_tol / 2;
            double Pa = oracle_probability(f, T, a).P, Pb = oracle_probability(f, T, b).P;
            CHECK(std::fabs(Pa - Pb) <= 10 * b.rel_tol);
            return rel(Pa, Pb);
        };
        CHECK(check(skewed(1), 3.0) <= 1e-8);
        // shifted-path runs converge in the relative sense
        CHECK(check(FieldProfile::nikitin(1, 2, 1), 5.0) <= 1e-8);
        CHECK(check(FieldProfile::nikitin(1, 2, 1), 20.0) <= 1e-8);
    }

    TEST_CASE("shifted path geometry")
    {
        auto f = FieldProfile::nikitin(1, 2, 1);
        ShiftedPathInfo sp = shifted_path(f, 20.0, IntegrationSettings{});
        REQUIRE(sp.path.size() > 3);
        CHECK(sp.path.front() == cplx(-50.0));
        CHECK(sp.path.back().real() == doctest::Approx(50.0));
        for (cplx z : sp.path) CHECK(z.imag() <= 0.0);
        CHECK(sp.level < sp.half_exponent);
        CHECK(sp.end_level > sp.half_exponent);
        CHECK(code_of([] { shifted_path(FieldProfile::berman(parse("0"), 1.0), 5.0, {}); }) == ErrorCode::precondition);
    }

    TEST_CASE("settings and extraction errors")
    {
        auto f = FieldProfile::nikitin(1, 2, 1);
        IntegrationSettings bad;
        bad.s_min = 1.0;
        CHECK(code_of([&] { bad.validate(); }) == ErrorCode::invalid_parameter);
        bad = {};
        bad.rel_tol = 0;
        CHECK(code_of([&] { bad.validate(); }) == ErrorCode::invalid_parameter);

        IntegrationSettings short_run = real_axis();
        short_run.s_max = 1.0;
        CHECK(code_of([&] {
                  auto tr = integrate_amplitude_system(f, 5.0, short_run, Representation::a12);
                  extract_a_minus(tr, f, 5.0);
              }) == ErrorCode::final_theta);

        IntegrationSettings few = real_axis();
        few.max_steps = 10;
        CHECK(code_of([&] { integrate_amplitude_system(f, 5.0, few, Representation::a12); }) ==
              ErrorCode::step_collapse);
        CHECK(code_of([&] { oracle_probability(f, -1.0); }) == ErrorCode::invalid_parameter);
    }

    TEST_CASE("sweep")
    {
        EffectivePotential ep(FieldProfile::nikitin(1, 2, 1));
        StokesGraph g = build_graph(ep, default_search_box(ep));
        ChainGeometry geo = chain_geometry(ep, g, identify_ned_chain(g));
        auto rows = sweep_T(ep, {5, 10, 20, 40}, IntegrationSettings{}, &geo, 2);
        REQUIRE(rows.size() == 4);
        for (const auto& r : rows) {
            CHECK(r.P_oracle > 0);
            REQUIRE(r.P_adiabatic);
            REQUIRE(r.rel_diff);
            CHECK(*r.rel_diff == doctest::Approx((r.P_oracle - *r.P_adiabatic) / *r.P_adiabatic));
            CHECK(r.winding_n12 == 2);
            CHECK(r.near_zero == (std::fabs(*r.cos_factor) < 0.1));
        }
        CHECK(rows[2].P_oracle == oracle_probability(ep.field(), 20.0).P);

        auto bare = sweep_T(ep, {5, 10}, IntegrationSettings{}, nullptr);
        CHECK_FALSE(bare[0].P_adiabatic);

        CHECK(code_of([&] { sweep_T(ep, {5, 10, 10}, IntegrationSettings{}, nullptr); }) ==
              ErrorCode::invalid_parameter);
        CHECK(code_of([&] { sweep_T(ep, {10, 5}, IntegrationSettings{}, nullptr); }) == ErrorCode::invalid_parameter);
        CHECK(code_of([&] { sweep_T(ep, {}, IntegrationSettings{}, nullptr); }) == ErrorCode::invalid_parameter);
    }
}
