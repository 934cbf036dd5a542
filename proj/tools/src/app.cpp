#include "adiabat/cli/app.hpp"
#include "adiabat/cli/report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <thread>

namespace adiabat::cli {

namespace {

using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::validation, msg); }

Box search_box(const Scenario& sc, const EffectivePotential& ep)
{
    return sc.search_box ? *sc.search_box : default_search_box(ep);
}

MethodChoice resolve(MethodChoice m, int chi_order, const NedChain& chain)
{
    if (chi_order == 1 && m != MethodChoice::automatic && m != MethodChoice::exact)
        fail("chi order 1 is only available with method exact");
    if (m != MethodChoice::automatic) return m;
    if (chi_order == 1) return MethodChoice::exact;
    return chain.upper_points.size() == 2 ? MethodChoice::two_tp : MethodChoice::sum;
}

void write_file(const std::string& path, const std::string& content)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) fail("cannot write '" + path + "'");
    f << content;
    if (!f.flush()) fail("cannot write '" + path + "'");
}

std::string output_path(const std::string& cli_out, const std::optional<std::string>& from_scenario,
                        std::string_view command)
{
    if (!cli_out.empty()) return cli_out;
    if (from_scenario) return *from_scenario;
    fail(std::string(command) + " needs --out or outputs." + std::string(command) + " in the scenario");
}

const std::vector<double>& require_T(const Scenario& sc)
{
    if (sc.T_list.empty()) fail("missing key 'T' (or 'T_list')");
    return sc.T_list;
}

ordered_json result_json(const TransitionResult& r)
{
    return ordered_json::parse(to_json(r));
}

std::vector<SweepRow> run_sweep(const Scenario& sc, const Asymptotics& as, unsigned threads)
{
    auto rows = sweep_T(as.ep, require_T(sc), sc.integration, nullptr, threads);
    for (auto& row : rows) {
        TransitionResult ad = as.at(row.T);
        row.P_adiabatic = ad.P;
        if (ad.P != 0.0) row.rel_diff = (row.P_oracle - ad.P) / ad.P;
        row.exponent = ad.exponent;
        row.phase = ad.interference_phase;
        row.cos_factor = ad.cos_factor;
        if (ad.n_first.size() > 1) row.winding_n12 = ad.n_first[1];
        row.near_zero = ad.cos_factor && std::fabs(*ad.cos_factor) < 0.1;
    }
    return rows;
}

struct Options {
    std::string scenario, out, input, method;
    int chi_order = -1;
};

Scenario load(const Options& o)
{
    Scenario sc = load_scenario(o.scenario);
    if (o.chi_order >= 0) sc.chi_order = o.chi_order;
    if (!o.method.empty()) sc.method = parse_method(o.method);
    return sc;
}

int cmd_graph(const Options& o, std::ostream& err)
{
    Scenario sc = load(o);
    EffectivePotential ep(sc.field());
    StokesGraph g = build_graph(ep, search_box(sc, ep), sc.graph);
    std::optional<NedChain> chain;
    try {
        chain = identify_ned_chain(g);
    } catch (const Error& e) {
        err << "warning: no chain labels: " << e.what() << '\n';
    }
    write_file(output_path(o.out, sc.outputs.graph, "graph"), emit_graph_svg(g, chain));
    return exit_ok;
}

int cmd_amplitude(const Options& o)
{
    Scenario sc = load(o);
    const auto& Ts = require_T(sc);
    Asymptotics as(sc);
    ordered_json j;
    j["schema"] = "adiabat.amplitude/1";
    j["method"] = std::string(to_string(as.method));
    j["chi_order"] = as.chi_order;
    ordered_json res = ordered_json::array();
    for (double T : Ts) res.push_back(result_json(as.at(T)));
    j["results"] = res;
    write_file(output_path(o.out, sc.outputs.amplitude, "amplitude"), j.dump(2) + "\n");
    return exit_ok;
}

int cmd_oracle(const Options& o)
{
    Scenario sc = load(o);
    const auto& Ts = require_T(sc);
    FieldProfile field = sc.field();
    ordered_json j;
    j["schema"] = "adiabat.oracle/1";
    ordered_json res = ordered_json::array();
    for (double T : Ts) res.push_back(result_json(oracle_probability(field, T, sc.integration)));
    j["results"] = res;
    write_file(output_path(o.out, sc.outputs.oracle, "oracle"), j.dump(2) + "\n");
    return exit_ok;
}

int cmd_sweep(const Options& o)
{
    Scenario sc = load(o);
    Asymptotics as(sc);
    auto rows = run_sweep(sc, as, thread_budget());
    write_file(output_path(o.out, sc.outputs.sweep, "sweep"), sweep_csv(rows));
    return exit_ok;
}

int cmd_compare(const Options& o, std::ostream& err)
{
    std::vector<SweepRow> rows;
    std::string method = "input";
    std::optional<Scenario> sc;
    if (!o.scenario.empty()) sc = load(o);
    if (!o.input.empty()) {
        std::ifstream in(o.input, std::ios::binary);
        if (!in) fail("cannot open sweep table '" + o.input + "'");
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        rows = parse_sweep_csv(text);
    } else {
        if (!sc) fail("compare needs --scenario or --input");
        Asymptotics as(*sc);
        method = std::string(to_string(as.method));
        rows = run_sweep(*sc, as, thread_budget());
    }
    CompareReport rep = compare_report(rows);
    for (const auto& w : rep.warnings) err << "warning: " << w << '\n';

    std::filesystem::path p = output_path(o.out, sc ? sc->outputs.compare : std::nullopt, "compare");
    std::filesystem::path json_path = p, csv_path = p;
    if (p.extension() == ".csv") json_path.replace_extension(".json");
    else csv_path.replace_extension(".csv");
    if (sc && sc->outputs.compare_csv) csv_path = *sc->outputs.compare_csv;
    if (csv_path == json_path) csv_path += ".csv";
    write_file(json_path.string(), compare_json(rep, method));
    write_file(csv_path.string(), compare_csv(rep));
    return exit_ok;
}

} // namespace

unsigned thread_budget()
{
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const char* env = std::getenv("ADIABAT_THREADS");
    if (!env || !*env) return hw;
    unsigned cap = 0;
    std::string_view s(env);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), cap);
    if (ec != std::errc() || ptr != s.data() + s.size() || cap == 0)
        fail("ADIABAT_THREADS must be a positive integer");
    return std::min(hw, cap);
}

Asymptotics::Asymptotics(const Scenario& sc)
    : field(sc.field()),
      ep(field),
      graph(build_graph(ep, search_box(sc, ep), sc.graph)),
      chain(identify_ned_chain(graph)),
      geo(chain_geometry(ep, graph, chain, sc.amplitude)),
      method(resolve(sc.method, sc.chi_order, chain)),
      chi_order(sc.chi_order),
      exact(sc.exact)
{
    exact.chi_order = chi_order;
}

TransitionResult Asymptotics::at(double T) const
{
    switch (method) {
    case MethodChoice::exact: return exact_leading_amplitude(ep, geo, T, exact);
    case MethodChoice::nu: return nikitin_umanskii_probability(ep, geo, T);
    case MethodChoice::two_tp: return two_tp_amplitude(geo, T);
    case MethodChoice::sum:
    case MethodChoice::automatic: break;
    }
    return adiabatic_amplitude(geo, T);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Adiabatic transition probabilities of two-level systems", "adiabat"};
    app.set_version_flag("--version", version);
    app.require_subcommand(1);

    Options o;
    auto common = [&](CLI::App* sub, bool scenario_required) {
        auto* s = sub->add_option("--scenario", o.scenario, "Scenario JSON file");
        if (scenario_required) s->required();
        sub->add_option("--out", o.out, "Output path (overrides the scenario)");
        sub->add_option("--chi-order", o.chi_order, "Order of the chi correction")->check(CLI::IsMember({0, 1}));
        sub->add_option("--method", o.method, "Asymptotic method")
            ->check(CLI::IsMember({"auto", "two_tp", "sum", "nu", "exact"}));
    };
    auto* graph = app.add_subcommand("graph", "Render the Stokes graph as SVG");
    auto* amplitude = app.add_subcommand("amplitude", "Asymptotic transition amplitudes as JSON");
    auto* oracle = app.add_subcommand("oracle", "Reference probabilities by direct integration as JSON");
    auto* sweep = app.add_subcommand("sweep", "Oracle and asymptotic probabilities over T_list as CSV");
    auto* compare = app.add_subcommand("compare", "Relative differences and decay fit as JSON and CSV");
    for (auto* sub : {graph, amplitude, oracle, sweep}) common(sub, true);
    common(compare, false);
    compare->add_option("--input", o.input, "Existing sweep CSV instead of running the sweep");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return exit_validation;
    }

    try {
        if (*graph) return cmd_graph(o, err);
        if (*amplitude) return cmd_amplitude(o);
        if (*oracle) return cmd_oracle(o);
        if (*sweep) return cmd_sweep(o);
        return cmd_compare(o, err);
    } catch (const Error& e) {
        err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
        return is_validation(e.code()) ? exit_validation : exit_numeric;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_numeric;
    }
}

} // namespace adiabat::cli
