#include "adiabat/cli/app.hpp"
#include "adiabat/cli/report.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace adiabat;
using namespace adiabat::cli;
namespace fs = std::filesystem;

namespace {

const char* nikitin_json = R"({"model": {"type": "nikitin", "b": 1, "delta_e": 2}, "mu": 1, "T_list": [5, 10, 20, 40]})";

struct TempDir {
    fs::path path;
    TempDir()
    {
        static int counter = 0;
        path = fs::temp_directory_path() / ("adiabat_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string write(const std::string& name, const std::string& text) const
    {
        std::ofstream(path / name, std::ios::binary) << text;
        return (path / name).string();
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct Outcome {
    int code;
    std::string out, err;
};

Outcome run_cli(std::vector<std::string> args)
{
    std::ostringstream out, err;
    int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::size_t count(const std::string& text, const std::string& what)
{
    std::size_t n = 0;
    for (auto p = text.find(what); p != std::string::npos; p = text.find(what, p + 1)) ++n;
    return n;
}

std::string validation_message(const std::string& json)
{
    try {
        parse_scenario(json);
    } catch (const Error& e) {
        CHECK(is_validation(e.code()));
        return e.what();
    }
    return "";
}

SweepRow row(double T, double P, std::optional<double> Pa, std::optional<double> cosf)
{
    SweepRow r;
    r.T = T;
    r.P_oracle = P;
    r.P_adiabatic = Pa;
    if (Pa) r.rel_diff = (P - *Pa) / *Pa;
    r.cos_factor = cosf;
    r.near_zero = cosf && std::fabs(*cosf) < 0.1;
    return r;
}

} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("scenario parsing")
    {
        Scenario sc = parse_scenario(nikitin_json);
        CHECK(sc.model.type == "nikitin");
        CHECK(sc.T_list == std::vector<double>{5, 10, 20, 40});
        CHECK(sc.field().kind() == FieldProfile::Kind::nikitin);

        Scenario full = parse_scenario(R"J({
            "schema": 1,
            "model": {"type": "custom", "bx": "1/(1+s^2)", "by": "0", "bz": "1",
                      "poles": [{"at": [0, 1], "order": 2}, {"at": [0, -1], "order": 2}],
                      "obstacles": [[0, 3]]},
            "T": 7,
            "integration": {"s_min": -40, "s_max": 40, "rel_tol": 1e-9, "path": "real_axis"},
            "search_box": {"re_min": -3, "re_max": 3, "im_min": -3, "im_max": 3},
            "amplitude": {"l": 1, "detour": "lower", "refine": 2},
            "graph": {"anti_stokes": false},
            "outputs": {"graph": "g.svg"},
            "chi_order": 1,
            "method": "exact"})J");
        CHECK(full.single_T);
        CHECK(full.integration.path == OraclePath::real_axis);
        CHECK(full.integration.s_max == 40);
        CHECK(full.amplitude.detour == DetourSide::lower);
        CHECK(full.chi_order == 1);
        CHECK(full.method == MethodChoice::exact);
        CHECK(full.outputs.graph == "g.svg");
        CHECK(full.model.poles.size() == 2);
    }

    TEST_CASE("scenario validation")
    {
        CHECK(validation_message(R"({"mu": 1})").find("'model'") != std::string::npos);
        CHECK(validation_message(R"({"model": {"type": "nikitin", "b": 1}})").find("'model.delta_e'") !=
              std::string::npos);
        CHECK(validation_message(R"({"model": {"type": "nikitin", "b": 1, "delta_e": 2}, "extra": 0})")
                  .find("unknown key 'extra'") != std::string::npos);
        CHECK(validation_message(R"({"model": {"type": "nikitin", "b": 1, "delta_e": 2, "c": 3}})")
                  .find("'model.c'") != std::string::npos);
        CHECK(validation_message(
                  R"({"model": {"type": "nikitin", "b": 1, "delta_e": 2}, "integration": {"rtol": 1}})")
                  .find("'integration.rtol'") != std::string::npos);
        CHECK_FALSE(validation_message(R"({"model": {"type": "nikitin", "b": 1, "delta_e": 2}, "T": 1, "T_list": [2]})").empty());
        CHECK_FALSE(validation_message(R"({"model": {"type": "nikitin", "b": 1, "delta_e": 2}, "chi_order": 2})").empty());
        CHECK_FALSE(validation_message(R"({"model": {"type": "nikitin", "b": "1", "delta_e": 2}})").empty());
        CHECK_FALSE(validation_message(R"({"model": {"type": "dipole"}})").empty());
        CHECK_FALSE(validation_message(R"({"model": )").empty());
        CHECK_FALSE(validation_message(R"({"model": {"type": "nikitin", "b": 1, "delta_e": 2}, "T_list": [-1]})").empty());
        // malformed component expressions are reported as validation errors
        try {
            parse_scenario(R"({"model": {"type": "berman", "f": "2s", "omega": 1}})");
            FAIL("no error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::syntax);
            CHECK(is_validation(e.code()));
        }
    }

    TEST_CASE("graph SVG")
    {
        TempDir d;
        std::string sc = d.write("nik.json", nikitin_json);
        auto r = run_cli({"graph", "--scenario", sc, "--out", d.file("a.svg")});
        REQUIRE(r.code == exit_ok);
        std::string svg = slurp(d.file("a.svg"));
        CHECK(svg.rfind("<?xml", 0) == 0);
        CHECK(count(svg, "<circle") == 6);
        CHECK(count(svg, "class=\"pole\"") == 2);
        CHECK(count(svg, "class=\"stokes\"") > 0);
        CHECK(count(svg, "stroke-dasharray") == count(svg, "class=\"anti-stokes\""));
        CHECK(count(svg, "text-decoration=\"overline\"") == 2); // s1-bar and s2-bar
        CHECK(svg.find("</svg>") != std::string::npos);

        REQUIRE(run_cli({"graph", "--scenario", sc, "--out", d.file("b.svg")}).code == exit_ok);
        CHECK(svg == slurp(d.file("b.svg")));
    }

    TEST_CASE("empty graph is a valid SVG with axes")
    {
        StokesGraph g;
        g.box = Box{-2, 2, -1, 1};
        std::string svg = emit_graph_svg(g, std::nullopt);
        CHECK(count(svg, "class=\"axis\"") == 2);
        CHECK(count(svg, "<circle") == 0);
        CHECK(svg.find("</svg>") != std::string::npos);
        SvgStyle strict;
        strict.allow_empty = false;
        CHECK_THROWS_AS(emit_graph_svg(g, std::nullopt, strict), Error);

        TempDir d;
        std::string sc = d.write("flat.json", R"({"model": {"type": "berman", "f": "0", "omega": 1}})");
        auto r = run_cli({"graph", "--scenario", sc, "--out", d.file("flat.svg")});
        CHECK(r.code == exit_ok);
        CHECK(count(slurp(d.file("flat.svg")), "class=\"axis\"") == 2);
    }

    TEST_CASE("sweep CSV")
    {
        TempDir d;
        std::string sc = d.write("nik.json", nikitin_json);
        auto r = run_cli({"sweep", "--scenario", sc, "--out", d.file("s.csv")});
        REQUIRE(r.code == exit_ok);
        std::string csv = slurp(d.file("s.csv"));
        CHECK(csv.rfind("T,P_oracle,P_adiabatic,rel_diff,exponent,phase,winding_n12\n", 0) == 0);
        CHECK(count(csv, "\n") == 5);
        CHECK(csv.find('\r') == std::string::npos);
        auto rows = parse_sweep_csv(csv);
        REQUIRE(rows.size() == 4);
        CHECK(rows[2].P_oracle == doctest::Approx(3.9246947929e-31).epsilon(1e-9));
        CHECK(rows[0].winding_n12 == 2);

        // round trip through the writer is exact
        CHECK(sweep_csv(rows) == csv);
    }

    TEST_CASE("compare report")
    {
        TempDir d;
        std::string sc = d.write("nik.json", nikitin_json);
        auto r = run_cli({"compare", "--scenario", sc, "--out", d.file("c.json")});
        REQUIRE(r.code == exit_ok);
        auto j = nlohmann::json::parse(slurp(d.file("c.json")));
        CHECK(j["schema"] == "adiabat.compare/1");
        CHECK(j["rows"].size() == 4);
        REQUIRE(j["fit"].is_object());
        CHECK(j["fit"]["std_error"].get<double>() >= 0);
        CHECK(j["fit"]["rows_used"] == 4);
        std::string csv = slurp(d.file("c.csv"));
        CHECK(csv.rfind("T,P_oracle,P_adiabatic,rel_diff,cos_factor,near_zero,used_in_fit\n", 0) == 0);

        // the same report from the sweep table
        REQUIRE(run_cli({"sweep", "--scenario", sc, "--out", d.file("s.csv")}).code == exit_ok);
        REQUIRE(run_cli({"compare", "--input", d.file("s.csv"), "--out", d.file("c2.json")}).code == exit_ok);
        auto j2 = nlohmann::json::parse(slurp(d.file("c2.json")));
        CHECK(j2["fit"]["order"].get<double>() == doctest::Approx(j["fit"]["order"].get<double>()).epsilon(1e-9));
    }

    TEST_CASE("decay fit")
    {
        // rel_diff = 0.3 / T exactly: order 1, zero standard error
        std::vector<SweepRow> rows;
        for (double T : {5.0, 10.0, 20.0, 40.0}) rows.push_back(row(T, 1.0 + 0.3 / T, 1.0, 0.9));
        auto rep = compare_report(rows);
        REQUIRE(rep.fit);
        CHECK(rep.fit->order == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(rep.fit->std_error < 1e-10);
        CHECK(rep.warnings.empty());

        // rows near interference zeros are left out of the fit
        rows[1] = row(10, 1.5, 1.0, 0.05);
        rep = compare_report(rows);
        REQUIRE(rep.fit);
        CHECK(rep.fit->rows_used == 3);
        CHECK_FALSE(rep.used[1]);
        CHECK(rep.fit->order == doctest::Approx(1.0).epsilon(1e-12));

        for (auto& r : rows) r = row(r.T, 1.1, 1.0, 0.01);
        rep = compare_report(rows);
        CHECK_FALSE(rep.fit);
        CHECK_FALSE(rep.warnings.empty());
        CHECK(compare_json(rep, "two_tp").find("\"fit\": null") != std::string::npos);

        std::vector<SweepRow> single = {row(5, 1e-8, std::nullopt, std::nullopt), row(10, 1e-15, std::nullopt, std::nullopt)};
        CHECK_THROWS_AS(compare_report(single), Error);
    }

    TEST_CASE("exit codes")
    {
        TempDir d;
        std::string nomodel = d.write("nomodel.json", R"({"mu": 1})");
        auto r = run_cli({"graph", "--scenario", nomodel, "--out", d.file("x.svg")});
        CHECK(r.code == exit_validation);
        CHECK(r.err.find("model") != std::string::npos);

        CHECK(run_cli({"graph", "--scenario", d.file("missing.json"), "--out", d.file("x.svg")}).code == exit_validation);
        CHECK(run_cli({"graph", "--scenario", d.write("bad.json", "{"), "--out", d.file("x.svg")}).code == exit_validation);
        CHECK(run_cli({"frobnicate"}).code == exit_validation);
        CHECK(run_cli({"sweep", "--out", d.file("x.csv")}).code == exit_validation);
        std::string sc = d.write("nik.json", nikitin_json);
        CHECK(run_cli({"sweep", "--scenario", sc, "--out", d.file("x.csv"), "--method", "magic"}).code == exit_validation);
        CHECK(run_cli({"sweep", "--scenario", sc, "--out", d.file("x.csv"), "--chi-order", "3"}).code == exit_validation);
        CHECK(run_cli({"amplitude", "--scenario", sc, "--out", d.file("x.json"), "--chi-order", "1", "--method", "nu"})
                  .code == exit_validation);
        CHECK(run_cli({"graph", "--scenario", sc}).code == exit_validation); // no output path
        CHECK(run_cli({"--help"}).code == exit_ok);

        // single-method table
        d.write("single.csv", "T,P_oracle\n5,2.7e-8\n10,1.6e-15\n20,3.9e-31\n");
        CHECK(run_cli({"compare", "--input", d.file("single.csv"), "--out", d.file("c.json")}).code == exit_validation);

        // numeric failure: the integration cannot finish within the step budget
        std::string tight = d.write("tight.json", R"({"model": {"type": "nikitin", "b": 1, "delta_e": 2}, "T": 5,
                                                     "integration": {"max_steps": 5}})");
        auto n = run_cli({"oracle", "--scenario", tight, "--out", d.file("o.json")});
        CHECK(n.code == exit_numeric);
        CHECK(n.err.find("step-collapse") != std::string::npos);
    }

    TEST_CASE("amplitude and oracle outputs")
    {
        TempDir d;
        std::string sc = d.write("nik.json", R"({"model": {"type": "nikitin", "b": 1, "delta_e": 2}, "T": 20,
                                                 "outputs": {"amplitude": ")" + d.file("a.json") + R"("}})");
        REQUIRE(run_cli({"amplitude", "--scenario", sc, "--method", "nu"}).code == exit_ok);
        auto a = nlohmann::json::parse(slurp(d.file("a.json")));
        CHECK(a["method"] == "nu");
        CHECK(a["results"][0]["method"] == "nikitin_umanskii");
        REQUIRE(run_cli({"amplitude", "--scenario", sc, "--chi-order", "1"}).code == exit_ok);
        CHECK(nlohmann::json::parse(slurp(d.file("a.json")))["method"] == "exact");
        REQUIRE(run_cli({"oracle", "--scenario", sc, "--out", d.file("o.json")}).code == exit_ok);
        auto o = nlohmann::json::parse(slurp(d.file("o.json")));
        CHECK(o["results"][0]["P"].get<double>() == doctest::Approx(3.9246947929e-31).epsilon(1e-9));
    }

    TEST_CASE("thread budget")
    {
        ::setenv("ADIABAT_THREADS", "1", 1);
        CHECK(thread_budget() == 1);
        ::setenv("ADIABAT_THREADS", "zero", 1);
        CHECK_THROWS_AS(thread_budget(), Error);
        ::unsetenv("ADIABAT_THREADS");
        CHECK(thread_budget() >= 1);
    }
}
