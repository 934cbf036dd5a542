#include "adiabat/potential.hpp"

#include <doctest.h>

#include <random>

using namespace adiabat;

namespace {

cplx nikitin_q2(cplx s, double T, double b, double de)
{
    cplx r = b * b + s * s;
    return 0.25 * de * de * (1.0 + 1.0 / (r * r * r)) - cplx(0, 1.5 * de / T) * s / r -
           0.75 / (T * T) * (2 * b * b + s * s) / (r * r);
}

} // namespace

TEST_SUITE("potential")
{
    TEST_CASE("q0 values")
    {
        EffectivePotential ep(FieldProfile::nikitin(1, 2, 1));
        CHECK(std::abs(ep.eval_q0(0.0) - 2.0) < 1e-14);
        cplx s1(0.5, std::sqrt(3.0) / 2);
        CHECK(std::abs(ep.eval_q0(s1)) < 1e-12);
        for (double s : {-10.0, -1.0, 0.3, 4.0}) {
            cplx q = ep.eval_q0(s);
            CHECK(std::abs(q.imag()) < 1e-15);
            CHECK(q.real() > 0);
            cplx r = 1.0 + s * s;
            CHECK(std::abs(q - (1.0 + 1.0 / (r * r * r))) < 1e-14);
        }
    }

    TEST_CASE("q2 matches the Nikitin closed form")
    {
        for (double b : {1.0, 0.7}) {
            for (double de : {2.0, 1.3}) {
                EffectivePotential ep(FieldProfile::nikitin(b, de, 1));
                cplx a = ep.eval_q2(0.3, 10.0), c = nikitin_q2(0.3, 10.0, b, de);
                CHECK(std::abs(a - c) <= 1e-12 * std::abs(c));
                std::mt19937 rng(3);
                std::uniform_real_distribution<double> re(-3, 3), im(-0.4, 0.4);
                for (int i = 0; i < 50; ++i) {
                    cplx s(re(rng), im(rng));
                    for (double T : {10.0, 100.0}) {
                        cplx x = ep.eval_q2(s, T), y = nikitin_q2(s, T, b, de);
                        CHECK(std::abs(x - y) <= 1e-10 * std::abs(y));
                    }
                }
            }
        }
    }

    TEST_CASE("q2 tends to q0 at rate 1/T")
    {
        EffectivePotential ep(FieldProfile::nikitin(1, 2, 1));
        for (cplx s : {cplx(0.3, 0), cplx(-1, 0.2)}) {
            double d2 = std::abs(ep.eval_q2(s, 1e2) - ep.eval_q0(s));
            double d3 = std::abs(ep.eval_q2(s, 1e3) - ep.eval_q0(s));
            double d4 = std::abs(ep.eval_q2(s, 1e4) - ep.eval_q0(s));
            CHECK(d3 / d2 == doctest::Approx(0.1).epsilon(0.02));
            CHECK(d4 / d3 == doctest::Approx(0.1).epsilon(0.02));
            CHECK(d2 * 1e2 < 10.0);
        }
    }

    TEST_CASE("q2 reflection")
    {
        // q2 is not real on the real axis; the reflection also reverses T,
        // and for a non-planar field the sign of By. q2 is quadratic in 1/T,
        // so its value at -T follows from T and 2T.
        auto at_minus = [](const EffectivePotential& ep, cplx s, double T) {
            cplx d1 = ep.eval_q2(s, T) - ep.eval_q0(s), d2 = ep.eval_q2(s, 2 * T) - ep.eval_q0(s);
            return ep.eval_q0(s) + 3.0 * d1 - 8.0 * d2;
        };
        EffectivePotential nik(FieldProfile::nikitin(1, 2, 1));
        EffectivePotential planar(FieldProfile::custom(parse("1/(2+s^2)"), parse("0"), parse("s")));
        EffectivePotential twisted(FieldProfile::custom(parse("1/(2+s^2)"), parse("s/(3+s^2)^2"), parse("1")));
        EffectivePotential mirror(FieldProfile::custom(parse("1/(2+s^2)"), parse("-s/(3+s^2)^2"), parse("1")));
        for (cplx s : {cplx(0.4, 0.2), cplx(-1.1, 0.3)}) {
            CHECK(std::abs(at_minus(nik, s, 7.0) - nikitin_q2(s, -7.0, 1, 2)) < 1e-12);
            CHECK(std::abs(planar.eval_q2(std::conj(s), 7.0) - std::conj(at_minus(planar, s, 7.0))) < 1e-11);
            CHECK(std::abs(mirror.eval_q2(std::conj(s), 7.0) - std::conj(at_minus(twisted, s, 7.0))) < 1e-11);
            CHECK(std::abs(planar.eval_q0(std::conj(s)) - std::conj(planar.eval_q0(s))) < 1e-12);
        }
    }

    TEST_CASE("q2 diverges at the poles")
    {
        EffectivePotential ep(FieldProfile::nikitin(1, 2, 1));
        double a = std::abs(ep.eval_q2(cplx(0, 1 - 1e-2), 10.0));
        double b = std::abs(ep.eval_q2(cplx(0, 1 - 1e-3), 10.0));
        CHECK(b > 100 * a);
    }

    TEST_CASE("Omega kernel")
    {
        Jet5 constant(3.0);
        CHECK(std::abs(omega_kernel(constant, 0.0)) == 0.0);
        Jet5 linear = Jet5::variable(1.0); // q = s at s = 1
        CHECK(std::abs(omega_kernel(linear, 0.0) - 0.3125) < 1e-15);

        EffectivePotential flat(FieldProfile::berman(parse("0"), 1.0));
        CHECK(std::abs(flat.omega(0.7, 10.0, KernelMode::adiabatic_q0)) < 1e-14);

        EffectivePotential ep(FieldProfile::nikitin(1, 2, 1));
        cplx w = ep.omega(0.2, 20.0, KernelMode::adiabatic_q0);
        CHECK(std::isfinite(std::abs(w)));
        // integrable along the real axis: the Langer term leaves a 1/s^2 tail
        double t30 = std::abs(ep.omega(30.0, 20.0, KernelMode::adiabatic_q0));
        double t60 = std::abs(ep.omega(60.0, 20.0, KernelMode::adiabatic_q0));
        CHECK(t60 / t30 < 0.3);
    }

    TEST_CASE("Langer term")
    {
        EffectivePotential none(FieldProfile::berman(parse("1/(1+s^2)"), 1.0));
        CHECK(none.langer_delta(0.3) == cplx(0));
        EffectivePotential one(FieldProfile::berman(parse("1/(1+s^2)"), 1.0, 1.0, {{cplx(0, 1), 2}}));
        CHECK(std::abs(one.langer_delta(0.0) + 0.25) < 1e-15);
        EffectivePotential two(FieldProfile::berman(parse("1/(1+s^2)"), 1.0, 1.0, {{cplx(0, 1), 2}, {cplx(0, -1), 2}}));
        for (double s : {-2.0, 0.0, 0.5}) CHECK(std::abs(two.langer_delta(s).imag()) < 1e-15);
    }

    TEST_CASE("c1 log derivative through polar angles")
    {
        auto f = FieldProfile::custom(parse("1/(2+s^2)"), parse("s/(3+s^2)^2"), parse("1"));
        for (cplx s : {cplx(0.4, 0.1), cplx(-1.3, 0)}) {
            FieldSample fs = eval_field(f, s);
            Vec3c b = f.components(s);
            JetVec j = f.jets(s, 1);
            cplx c1 = b[0] + cplx(0, 1) * b[1];
            cplx dc1 = j[0][1] + cplx(0, 1) * j[1][1];
            CHECK(std::abs(c1_log_derivative_polar(fs) - dc1 / c1) < 1e-10 * std::abs(dc1 / c1));
        }
    }
}
