#include "adiabat/stokes.hpp"

#include <doctest.h>

#include <algorithm>

using namespace adiabat;

namespace {

const double pi = 3.14159265358979323846;
const double h = 0.8660254037844386;

bool contains_point(const std::vector<TurningPoint>& tps, cplx z, double tol)
{
    return std::any_of(tps.begin(), tps.end(), [&](const TurningPoint& t) { return std::abs(t.location - z) <= tol; });
}

std::vector<std::vector<cplx>> stokes_lines(const StokesGraph& g, bool upper_origin, bool conjugate)
{
    std::vector<std::vector<cplx>> out;
    for (const auto& L : g.lines) {
        if (L.kind != LineKind::stokes) continue;
        if ((g.turning_points[std::size_t(L.origin)].location.imag() > 0) != upper_origin) continue;
        auto p = L.points;
        if (conjugate)
            for (auto& z : p) z = std::conj(z);
        out.push_back(p);
    }
    return out;
}

const StokesGraph& nikitin_graph()
{
    static const StokesGraph g = [] {
        EffectivePotential ep(FieldProfile::nikitin(1, 2, 1));
        return build_graph(ep, default_search_box(ep));
    }();
    return g;
}

} // namespace

TEST_SUITE("stokes")
{
    TEST_CASE("Nikitin turning points")
    {
        EffectivePotential ep(FieldProfile::nikitin(1, 2, 1));
        auto up = find_turning_points(ep, Box{-2, 2, 0, 2});
        REQUIRE(up.size() == 3);
        for (cplx z : {cplx(-0.5, h), cplx(0.5, h), cplx(0, std::sqrt(2.0))}) CHECK(contains_point(up, z, 1e-10));
        auto lo = find_turning_points(ep, Box{-2, 2, -2, 0});
        REQUIRE(lo.size() == 3);
        for (const auto& t : up) CHECK(contains_point(lo, std::conj(t.location), 1e-10));
        for (const auto& t : up) CHECK(t.residual <= 1e-12);
    }

    TEST_CASE("Berman class turning points")
    {
        EffectivePotential ep(
            FieldProfile::berman(parse("1/(1+s^2)"), 1.0, 1.0, {{cplx(0, 1), 2}, {cplx(0, -1), 2}}));
        auto tps = find_turning_points(ep, Box{-3, 3, -3, 3});
        REQUIRE(tps.size() == 4);
        for (cplx r2 : {cplx(-1, -1), cplx(-1, 1)})
            for (double sign : {1.0, -1.0}) CHECK(contains_point(tps, sign * std::sqrt(r2), 1e-10));
    }

    TEST_CASE("argument-principle count matches the roots")
    {
        EffectivePotential ep(FieldProfile::nikitin(1, 2, 1));
        auto f = [&](cplx s) -> std::pair<cplx, cplx> {
            Jet5 q = ep.q0_jet(s);
            return {q[0], q[1]};
        };
        for (Box b : {Box{-2, 2, 0.05, 2}, Box{-2.1, 2.3, -1.7, 1.9}, Box{0.1, 3, -3, 3}}) {
            int pole_order = 0;
            for (const auto& p : ep.poles())
                if (b.contains(p.location)) pole_order += p.order;
            double w = boundary_winding(f, b);
            auto tps = find_turning_points(ep, b);
            CHECK(std::lround(w) + pole_order == long(tps.size()));
        }
    }

    TEST_CASE("local model q = s")
    {
        ValueAndDerivative q = [](cplx s) { return std::pair<cplx, cplx>{s, 1.0}; };
        TurningPoint tp = make_turning_point(0.0, 1.0);
        TraceOptions opts;
        opts.box = Box{-3, 3, -3, 3};
        for (int k = 0; k < 3; ++k) {
            StokesLine L = trace_line(q, {tp}, {}, 0, k, LineKind::stokes, opts);
            CHECK(L.terminus == Terminus::infinity_direction);
            cplx dir = tp.stokes_dirs[std::size_t(k)];
            double worst = 0;
            for (cplx z : L.points) worst = std::max(worst, std::abs((z * std::conj(dir)).imag()));
            CHECK(worst < 1e-8);
        }
        // Im W = 0 rays of W = 2/3 s^(3/2)
        CHECK(std::abs(std::arg(tp.stokes_dirs[0])) < 1e-15);
        CHECK(std::abs(std::arg(tp.stokes_dirs[1]) - 2 * pi / 3) < 1e-12);
    }

    TEST_CASE("no turning point to trace from")
    {
        ValueAndDerivative q = [](cplx) { return std::pair<cplx, cplx>{1.0, 0.0}; };
        try {
            trace_line(q, {}, {}, 0, 0, LineKind::stokes);
            FAIL("no error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::precondition);
        }
    }

    TEST_CASE("Nikitin graph")
    {
        const StokesGraph& g = nikitin_graph();
        CHECK(g.turning_points.size() == 6);
        CHECK(g.poles.size() == 2);
        CHECK(g.lines.size() == 36);
        CHECK_FALSE(g.sectors.empty());

        // the main upper line joins the two chain points
        int a = -1, b = -1;
        for (std::size_t i = 0; i < g.turning_points.size(); ++i) {
            if (std::abs(g.turning_points[i].location - cplx(0.5, h)) < 1e-9) a = int(i);
            if (std::abs(g.turning_points[i].location - cplx(-0.5, h)) < 1e-9) b = int(i);
        }
        REQUIRE(a >= 0);
        REQUIRE(b >= 0);
        bool joined = false;
        for (const auto& L : g.lines)
            if (L.kind == LineKind::stokes && L.origin == a && L.terminus == Terminus::turning_point && L.end_index == b)
                joined = true;
        CHECK(joined);
    }

    TEST_CASE("line invariants")
    {
        const StokesGraph& g = nikitin_graph();
        for (const auto& tp : g.turning_points) {
            for (int k = 0; k < 3; ++k) {
                double d = std::abs(std::arg(tp.stokes_dirs[std::size_t((k + 1) % 3)] / tp.stokes_dirs[std::size_t(k)]));
                CHECK(std::abs(d - 2 * pi / 3) < 1e-6);
            }
        }
        for (const auto& L : g.lines) CHECK(L.max_drift <= 1e-6);
    }

    TEST_CASE("traced lower lines are conjugates of the upper ones")
    {
        EffectivePotential ep(FieldProfile::nikitin(1, 2, 1));
        GraphOptions opts;
        opts.enforce_symmetry = false;
        StokesGraph g = build_graph(ep, default_search_box(ep), opts);
        CHECK(hausdorff_distance(stokes_lines(g, false, false), stokes_lines(g, true, true)) <= 1e-8);
    }

    TEST_CASE("retracing with a tighter tolerance")
    {
        EffectivePotential ep(FieldProfile::nikitin(1, 2, 1));
        Box box = default_search_box(ep);
        GraphOptions a, b;
        b.trace.sagitta_tol = a.trace.sagitta_tol / 2;
        a.anti_stokes = b.anti_stokes = false;
        StokesGraph ga = build_graph(ep, box, a), gb = build_graph(ep, box, b);
        REQUIRE(ga.lines.size() == gb.lines.size());
        for (std::size_t i = 0; i < ga.lines.size(); ++i)
            CHECK(hausdorff_distance({ga.lines[i].points}, {gb.lines[i].points}) <= 10 * a.trace.sagitta_tol);
    }

    TEST_CASE("constant potential has an empty graph")
    {
        EffectivePotential ep(FieldProfile::berman(parse("0"), 1.0));
        StokesGraph g = build_graph(ep, Box{});
        CHECK(g.turning_points.empty());
        CHECK(g.lines.empty());
        CHECK(g.sectors.size() == 1);
        try {
            identify_ned_chain(g);
            FAIL("no error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::structure_not_ned);
        }
    }

    TEST_CASE("NED chain")
    {
        NedChain c = identify_ned_chain(nikitin_graph());
        REQUIRE(c.upper_points.size() == 2);
        CHECK(std::abs(c.upper_points[0] - cplx(-0.5, h)) < 1e-10);
        CHECK(std::abs(c.upper_points[1] - cplx(0.5, h)) < 1e-10);
        REQUIRE_FALSE(c.lower_points.empty());
        CHECK(std::abs(c.lower_points[0] - cplx(-0.5, -h)) < 1e-10);
        for (double x : {-20.0, -1.0, 0.0, 0.5, 7.0}) CHECK(c.in_strip(x));
        for (const auto& tp : nikitin_graph().turning_points) CHECK_FALSE(c.in_strip(tp.location));
    }

    TEST_CASE("single conjugate pair gives a one-point chain")
    {
        EffectivePotential ep(FieldProfile::custom(parse("1"), parse("0"), parse("s")));
        StokesGraph g = build_graph(ep, default_search_box(ep));
        NedChain c = identify_ned_chain(g);
        REQUIRE(c.upper_points.size() == 1);
        CHECK(std::abs(c.upper_points[0] - cplx(0, 1)) < 1e-10);
    }

    TEST_CASE("graph JSON")
    {
        std::string j = graph_to_json(nikitin_graph(), identify_ned_chain(nikitin_graph()));
        CHECK(j.find("turning_points") != std::string::npos);
        CHECK(j == graph_to_json(nikitin_graph(), identify_ned_chain(nikitin_graph())));
    }
}
