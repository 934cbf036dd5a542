#include "adiabat/cli/scenario.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace adiabat::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::validation, msg); }

// Object reader that remembers which keys were consumed so leftovers can be
// reported as unknown.
class Section {
public:
    Section(const json& j, std::string where) : j_(j), where_(std::move(where))
    {
        if (!j_.is_object()) fail(label() + " must be an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& get(const std::string& key)
    {
        if (!j_.contains(key)) fail("missing key '" + path(key) + "'");
        seen_.insert(key);
        return j_.at(key);
    }

    double number(const std::string& key)
    {
        const json& v = get(key);
        if (!v.is_number()) fail("'" + path(key) + "' must be a number");
        return v.get<double>();
    }
    void number(const std::string& key, double& out)
    {
        if (has(key)) out = number(key);
    }
    void integer(const std::string& key, long& out)
    {
        if (!has(key)) return;
        const json& v = get(key);
        if (!v.is_number_integer()) fail("'" + path(key) + "' must be an integer");
        out = v.get<long>();
    }
    void integer(const std::string& key, int& out)
    {
        long v = out;
        integer(key, v);
        out = int(v);
    }
    void boolean(const std::string& key, bool& out)
    {
        if (!has(key)) return;
        const json& v = get(key);
        if (!v.is_boolean()) fail("'" + path(key) + "' must be true or false");
        out = v.get<bool>();
    }
    std::string string(const std::string& key)
    {
        const json& v = get(key);
        if (!v.is_string()) fail("'" + path(key) + "' must be a string");
        return v.get<std::string>();
    }
    void string(const std::string& key, std::optional<std::string>& out)
    {
        if (has(key)) out = string(key);
    }

    std::string path(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }
    std::string label() const { return where_.empty() ? "scenario" : "'" + where_ + "'"; }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) fail("unknown key '" + path(it.key()) + "'");
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

cplx point(const json& v, const std::string& where)
{
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        fail("'" + where + "' must be a [re, im] pair");
    return {v[0].get<double>(), v[1].get<double>()};
}

std::vector<Pole> poles(const json& v, const std::string& where)
{
    if (!v.is_array()) fail("'" + where + "' must be an array");
    std::vector<Pole> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        Section p(v[i], where + "[" + std::to_string(i) + "]");
        Pole pole;
        pole.location = point(p.get("at"), p.path("at"));
        p.integer("order", pole.order);
        if (pole.order < 1) fail("'" + p.path("order") + "' must be positive");
        p.finish();
        out.push_back(pole);
    }
    return out;
}

std::vector<cplx> points(const json& v, const std::string& where)
{
    if (!v.is_array()) fail("'" + where + "' must be an array");
    std::vector<cplx> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(point(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

ModelSpec parse_model(Section m)
{
    ModelSpec spec;
    spec.type = m.string("type");
    if (spec.type == "nikitin") {
        spec.b = m.number("b");
        spec.delta_e = m.number("delta_e");
        if (!(spec.b > 0) || !(spec.delta_e > 0)) fail("nikitin model needs b > 0 and delta_e > 0");
    } else if (spec.type == "berman") {
        spec.f = m.string("f");
        spec.omega = m.number("omega");
        if (m.has("poles")) spec.poles = poles(m.get("poles"), m.path("poles"));
    } else if (spec.type == "custom") {
        spec.bx = m.string("bx");
        spec.by = m.string("by");
        spec.bz = m.string("bz");
        if (m.has("poles")) spec.poles = poles(m.get("poles"), m.path("poles"));
        if (m.has("obstacles")) spec.obstacles = points(m.get("obstacles"), m.path("obstacles"));
    } else {
        fail("'model.type' must be nikitin, berman or custom");
    }
    m.finish();
    return spec;
}

OraclePath parse_path(std::string_view s)
{
    if (s == "automatic") return OraclePath::automatic;
    if (s == "real_axis") return OraclePath::real_axis;
    if (s == "shifted") return OraclePath::shifted;
    fail("'integration.path' must be automatic, real_axis or shifted");
}

void parse_integration(Section in, IntegrationSettings& st)
{
    in.number("s_min", st.s_min);
    in.number("s_max", st.s_max);
    in.number("rel_tol", st.rel_tol);
    in.number("abs_tol", st.abs_tol);
    in.integer("max_steps", st.max_steps);
    in.number("phase_resolution", st.phase_resolution);
    in.number("level_margin", st.level_margin);
    if (in.has("path")) st.path = parse_path(in.string("path"));
    in.finish();
    st.store_trajectory = false;
    try {
        st.validate();
    } catch (const Error& e) {
        fail(std::string("integration: ") + e.what());
    }
}

Box parse_box(Section b)
{
    Box box;
    box.re_min = b.number("re_min");
    box.re_max = b.number("re_max");
    box.im_min = b.number("im_min");
    box.im_max = b.number("im_max");
    b.finish();
    if (!(box.re_min < box.re_max) || !(box.im_min < box.im_max)) fail("'search_box' is empty");
    return box;
}

void parse_amplitude(Section a, AmplitudeOptions& opt, ExactLeadingOptions& ex)
{
    a.integer("l", opt.l);
    if (a.has("detour")) {
        std::string d = a.string("detour");
        if (d == "upper") opt.detour = DetourSide::upper;
        else if (d == "lower") opt.detour = DetourSide::lower;
        else fail("'amplitude.detour' must be upper or lower");
    }
    a.integer("refine", opt.refine);
    a.number("clearance", opt.clearance);
    a.number("tail_tolerance", ex.tail_tolerance);
    a.number("exact_s_max", ex.s_max);
    a.finish();
    if (opt.refine < 1) fail("'amplitude.refine' must be at least 1");
    if (!(opt.clearance > 0)) fail("'amplitude.clearance' must be positive");
    if (!(ex.tail_tolerance > 0)) fail("'amplitude.tail_tolerance' must be positive");
    if (!(ex.s_max > 0)) fail("'amplitude.exact_s_max' must be positive");
}

void parse_graph(Section g, GraphOptions& opt)
{
    g.boolean("anti_stokes", opt.anti_stokes);
    g.boolean("enforce_symmetry", opt.enforce_symmetry);
    g.number("max_step", opt.trace.max_step);
    g.number("max_length", opt.trace.max_length);
    g.finish();
    if (!(opt.trace.max_step > 0) || !(opt.trace.max_length > 0)) fail("'graph' step and length must be positive");
}

void parse_outputs(Section o, OutputPaths& out)
{
    o.string("graph", out.graph);
    o.string("amplitude", out.amplitude);
    o.string("oracle", out.oracle);
    o.string("sweep", out.sweep);
    o.string("compare", out.compare);
    o.string("compare_csv", out.compare_csv);
    o.finish();
}

} // namespace

std::string_view to_string(MethodChoice m)
{
    switch (m) {
    case MethodChoice::automatic: return "auto";
    case MethodChoice::two_tp: return "two_tp";
    case MethodChoice::sum: return "sum";
    case MethodChoice::nu: return "nu";
    case MethodChoice::exact: return "exact";
    }
    return "?";
}

MethodChoice parse_method(std::string_view text)
{
    for (auto m : {MethodChoice::automatic, MethodChoice::two_tp, MethodChoice::sum, MethodChoice::nu,
                   MethodChoice::exact})
        if (text == to_string(m)) return m;
    fail("method must be one of auto, two_tp, sum, nu, exact");
}

FieldProfile Scenario::field() const
{
    if (model.type == "nikitin") return FieldProfile::nikitin(model.b, model.delta_e, mu);
    if (model.type == "berman") return FieldProfile::berman(parse(model.f), model.omega, mu, model.poles);
    return FieldProfile::custom(parse(model.bx), parse(model.by), parse(model.bz), mu, model.poles,
                                model.obstacles);
}

Scenario parse_scenario(std::string_view json_text)
{
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(std::string("scenario is not valid JSON: ") + e.what());
    }

    Section root(doc, "");
    Scenario sc;
    if (root.has("schema")) {
        const json& v = root.get("schema");
        if (!v.is_number_integer() || v.get<int>() != 1) fail("'schema' must be 1");
    }
    sc.model = parse_model(Section(root.get("model"), "model"));
    root.number("mu", sc.mu);
    if (!(sc.mu > 0)) fail("'mu' must be positive");

    if (root.has("T") && root.has("T_list")) fail("give either 'T' or 'T_list', not both");
    if (root.has("T")) {
        sc.T_list = {root.number("T")};
        sc.single_T = true;
    } else if (root.has("T_list")) {
        const json& v = root.get("T_list");
        if (!v.is_array() || v.empty()) fail("'T_list' must be a non-empty array");
        for (auto& t : v) {
            if (!t.is_number()) fail("'T_list' entries must be numbers");
            sc.T_list.push_back(t.get<double>());
        }
    }
    for (double T : sc.T_list)
        if (!(T > 0)) fail("T values must be positive");

    if (root.has("integration")) parse_integration(Section(root.get("integration"), "integration"), sc.integration);
    else sc.integration.store_trajectory = false;
    if (root.has("search_box")) sc.search_box = parse_box(Section(root.get("search_box"), "search_box"));
    if (root.has("amplitude")) parse_amplitude(Section(root.get("amplitude"), "amplitude"), sc.amplitude, sc.exact);
    if (root.has("graph")) parse_graph(Section(root.get("graph"), "graph"), sc.graph);
    if (root.has("outputs")) parse_outputs(Section(root.get("outputs"), "outputs"), sc.outputs);
    if (root.has("chi_order")) {
        const json& v = root.get("chi_order");
        if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1)) fail("'chi_order' must be 0 or 1");
        sc.chi_order = v.get<int>();
    }
    if (root.has("method")) sc.method = parse_method(root.string("method"));
    root.finish();

    // fail early on malformed expressions
    (void)sc.field();
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open scenario '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

} // namespace adiabat::cli
