#include "adiabat/cli/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace adiabat::cli {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::validation, msg); }

std::string fixed6(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v == 0.0 ? 0.0 : v); // no "-0.000000" from -0
    std::string s = buf;
    if (s == "-0.000000") s = "0.000000";
    return s;
}

// World (complex plane) to canvas coordinates.
struct Frame {
    Box box;
    double x0, y0, sx, sy;

    Frame(const Box& b, const SvgStyle& st) : box(b)
    {
        x0 = st.margin;
        y0 = st.margin;
        sx = (st.width - 2 * st.margin) / (b.re_max - b.re_min);
        sy = (st.height - 2 * st.margin) / (b.im_max - b.im_min);
    }
    double x(double re) const { return x0 + (re - box.re_min) * sx; }
    double y(double im) const { return y0 + (box.im_max - im) * sy; }
    std::string xy(cplx z) const { return fixed6(x(z.real())) + "," + fixed6(y(z.imag())); }
};

std::string subscript_label(bool bar, int k)
{
    std::string deco = bar ? " text-decoration=\"overline\"" : "";
    return "<tspan" + deco + ">s</tspan><tspan baseline-shift=\"sub\" font-size=\"9\">" + std::to_string(k) +
           "</tspan>";
}

std::string optional_number(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::optional<double> parse_cell(const std::string& cell, int line, const std::string& column)
{
    if (cell.empty()) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
        fail("line " + std::to_string(line) + ": bad number '" + cell + "' in column " + column);
    return v;
}

} // namespace

std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

std::string emit_graph_svg(const StokesGraph& g, const std::optional<NedChain>& chain, const SvgStyle& style)
{
    if (g.turning_points.empty() && g.lines.empty() && !style.allow_empty)
        throw Error(ErrorCode::precondition, "empty Stokes graph");

    Frame f(g.box, style);
    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    o << "<!-- adiabat " << version << " -->\n";
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << style.width << "\" height=\""
      << style.height << "\" viewBox=\"0 0 " << style.width << ' ' << style.height << "\">\n";
    o << "<defs><clipPath id=\"plot\"><rect x=\"" << fixed6(f.x(g.box.re_min)) << "\" y=\""
      << fixed6(f.y(g.box.im_max)) << "\" width=\"" << fixed6(f.x(g.box.re_max) - f.x(g.box.re_min))
      << "\" height=\"" << fixed6(f.y(g.box.im_min) - f.y(g.box.im_max)) << "\"/></clipPath></defs>\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // frame and axes
    o << "<g class=\"axes\" stroke=\"#888\" stroke-width=\"1\" fill=\"none\">\n";
    o << "<rect x=\"" << fixed6(f.x(g.box.re_min)) << "\" y=\"" << fixed6(f.y(g.box.im_max)) << "\" width=\""
      << fixed6(f.x(g.box.re_max) - f.x(g.box.re_min)) << "\" height=\""
      << fixed6(f.y(g.box.im_min) - f.y(g.box.im_max)) << "\"/>\n";
    if (g.box.im_min <= 0 && g.box.im_max >= 0)
        o << "<line class=\"axis\" x1=\"" << fixed6(f.x(g.box.re_min)) << "\" y1=\"" << fixed6(f.y(0)) << "\" x2=\""
          << fixed6(f.x(g.box.re_max)) << "\" y2=\"" << fixed6(f.y(0)) << "\"/>\n";
    if (g.box.re_min <= 0 && g.box.re_max >= 0)
        o << "<line class=\"axis\" x1=\"" << fixed6(f.x(0)) << "\" y1=\"" << fixed6(f.y(g.box.im_min)) << "\" x2=\""
          << fixed6(f.x(0)) << "\" y2=\"" << fixed6(f.y(g.box.im_max)) << "\"/>\n";
    o << "</g>\n";
    o << "<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#444\">\n";
    o << "<text x=\"" << fixed6(f.x(g.box.re_min)) << "\" y=\"" << fixed6(f.y(g.box.im_min) + 14) << "\">"
      << fixed6(g.box.re_min) << "</text>\n";
    o << "<text x=\"" << fixed6(f.x(g.box.re_max)) << "\" y=\"" << fixed6(f.y(g.box.im_min) + 14)
      << "\" text-anchor=\"end\">" << fixed6(g.box.re_max) << "</text>\n";
    o << "<text x=\"" << fixed6(f.x(g.box.re_min) - 4) << "\" y=\"" << fixed6(f.y(g.box.im_max) + 4)
      << "\" text-anchor=\"end\">" << fixed6(g.box.im_max) << "</text>\n";
    o << "<text x=\"" << fixed6(f.x(g.box.re_min) - 4) << "\" y=\"" << fixed6(f.y(g.box.im_min))
      << "\" text-anchor=\"end\">" << fixed6(g.box.im_min) << "</text>\n";
    o << "</g>\n";

    o << "<g clip-path=\"url(#plot)\" fill=\"none\" stroke-width=\"1.5\">\n";
    for (const auto& line : g.lines) {
        if (line.points.size() < 2) continue;
        bool stokes = line.kind == LineKind::stokes;
        o << "<polyline class=\"" << (stokes ? "stokes" : "anti-stokes") << "\" stroke=\""
          << (stokes ? "#1f4e9c" : "#b5532a") << '"' << (stokes ? "" : " stroke-dasharray=\"6,4\"")
          << " points=\"";
        for (std::size_t i = 0; i < line.points.size(); ++i) o << (i ? " " : "") << f.xy(line.points[i]);
        o << "\"/>\n";
    }
    o << "</g>\n";

    o << "<g class=\"turning-points\" fill=\"black\">\n";
    for (const auto& tp : g.turning_points)
        o << "<circle cx=\"" << fixed6(f.x(tp.location.real())) << "\" cy=\"" << fixed6(f.y(tp.location.imag()))
          << "\" r=\"" << fixed6(style.marker_radius) << "\"/>\n";
    o << "</g>\n";

    o << "<g stroke=\"#c00\" stroke-width=\"2\">\n";
    for (const auto& p : g.poles) {
        double x = f.x(p.location.real()), y = f.y(p.location.imag()), c = style.cross_size;
        o << "<path class=\"pole\" d=\"M" << fixed6(x - c) << ',' << fixed6(y - c) << " L" << fixed6(x + c) << ','
          << fixed6(y + c) << " M" << fixed6(x - c) << ',' << fixed6(y + c) << " L" << fixed6(x + c) << ','
          << fixed6(y - c) << "\"/>\n";
    }
    o << "</g>\n";

    if (chain) {
        o << "<g class=\"labels\" font-family=\"serif\" font-size=\"14\" fill=\"black\">\n";
        auto label = [&](cplx z, bool bar, int k) {
            o << "<text x=\"" << fixed6(f.x(z.real()) + 8) << "\" y=\"" << fixed6(f.y(z.imag()) - 8) << "\">"
              << subscript_label(bar, k) << "</text>\n";
        };
        for (std::size_t k = 0; k < chain->upper_points.size(); ++k) label(chain->upper_points[k], false, int(k) + 1);
        for (std::size_t k = 0; k < chain->lower_points.size(); ++k) label(chain->lower_points[k], true, int(k) + 1);
        o << "</g>\n";
    }
    o << "</svg>\n";
    return o.str();
}

std::string sweep_csv(const std::vector<SweepRow>& rows)
{
    std::string out = std::string(sweep_header) + "\n";
    for (const auto& r : rows) {
        out += format_number(r.T) + ',' + format_number(r.P_oracle) + ',' + optional_number(r.P_adiabatic) + ',' +
               optional_number(r.rel_diff) + ',' + optional_number(r.exponent) + ',' + optional_number(r.phase) +
               ',' + (r.winding_n12 ? std::to_string(*r.winding_n12) : std::string()) + '\n';
    }
    return out;
}

std::vector<SweepRow> parse_sweep_csv(std::string_view text)
{
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line)) fail("sweep table is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_csv_line(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    for (const char* need : {"T", "P_oracle"})
        if (!col.count(need)) fail(std::string("sweep table lacks column '") + need + "'");

    std::vector<SweepRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            fail("line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) + " cells");
        auto get = [&](const char* name) -> std::optional<double> {
            auto it = col.find(name);
            return it == col.end() ? std::nullopt : parse_cell(cells[it->second], lineno, name);
        };
        SweepRow r;
        auto T = get("T");
        auto P = get("P_oracle");
        if (!T || !P) fail("line " + std::to_string(lineno) + ": T and P_oracle are required");
        r.T = *T;
        r.P_oracle = *P;
        r.P_adiabatic = get("P_adiabatic");
        r.rel_diff = get("rel_diff");
        r.exponent = get("exponent");
        r.phase = get("phase");
        if (auto w = get("winding_n12")) r.winding_n12 = int(std::lround(*w));
        if (r.phase) {
            r.cos_factor = std::cos(*r.phase);
            r.near_zero = std::fabs(*r.cos_factor) < 0.1;
        }
        if (r.P_adiabatic && !r.rel_diff && *r.P_adiabatic != 0.0)
            r.rel_diff = (r.P_oracle - *r.P_adiabatic) / *r.P_adiabatic;
        rows.push_back(r);
    }
    return rows;
}

CompareReport compare_report(const std::vector<SweepRow>& rows)
{
    CompareReport rep;
    rep.rows = rows;
    bool any_asymptotic = std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.P_adiabatic.has_value(); });
    if (!any_asymptotic) fail("comparison needs both oracle and asymptotic probabilities");

    std::vector<double> xs, ys;
    for (const auto& r : rows) {
        bool ok = r.P_adiabatic && r.rel_diff && std::isfinite(*r.rel_diff) && *r.rel_diff != 0.0 && !r.near_zero &&
                  r.T > 0;
        rep.used.push_back(ok);
        if (!ok) continue;
        xs.push_back(std::log(1.0 / r.T));
        ys.push_back(std::log(std::fabs(*r.rel_diff)));
    }
    std::size_t n = xs.size();
    if (n < 3) {
        rep.warnings.push_back("fit skipped: " + std::to_string(n) + " usable rows, need at least 3");
        return rep;
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) mx += xs[i], my += ys[i];
    mx /= double(n);
    my /= double(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx <= 0) {
        rep.warnings.push_back("fit skipped: all usable rows share one T");
        return rep;
    }
    DecayFit fit;
    fit.order = sxy / sxx;
    fit.intercept = my - fit.order * mx;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double e = ys[i] - fit.intercept - fit.order * xs[i];
        ss += e * e;
    }
    fit.std_error = std::sqrt(ss / double(n - 2) / sxx);
    fit.rows_used = int(n);
    rep.fit = fit;
    return rep;
}

std::string compare_json(const CompareReport& r, std::string_view method)
{
    using nlohmann::ordered_json;
    auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(); };
    ordered_json j;
    j["schema"] = "adiabat.compare/1";
    j["method"] = std::string(method);
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        const auto& row = r.rows[i];
        ordered_json e;
        e["T"] = row.T;
        e["P_oracle"] = row.P_oracle;
        e["P_adiabatic"] = opt(row.P_adiabatic);
        e["rel_diff"] = opt(row.rel_diff);
        e["cos_factor"] = opt(row.cos_factor);
        e["near_zero"] = row.near_zero;
        e["used_in_fit"] = bool(r.used[i]);
        rows.push_back(e);
    }
    j["rows"] = rows;
    if (r.fit) {
        j["fit"] = {{"order", r.fit->order},
                    {"std_error", r.fit->std_error},
                    {"intercept", r.fit->intercept},
                    {"rows_used", r.fit->rows_used}};
    } else {
        j["fit"] = nullptr;
    }
    j["warnings"] = r.warnings;
    return j.dump(2) + "\n";
}

std::string compare_csv(const CompareReport& r)
{
    std::string out = "T,P_oracle,P_adiabatic,rel_diff,cos_factor,near_zero,used_in_fit\n";
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        const auto& row = r.rows[i];
        out += format_number(row.T) + ',' + format_number(row.P_oracle) + ',' + optional_number(row.P_adiabatic) +
               ',' + optional_number(row.rel_diff) + ',' + optional_number(row.cos_factor) + ',' +
               (row.near_zero ? "1" : "0") + ',' + (r.used[i] ? "1" : "0") + '\n';
    }
    return out;
}

} // namespace adiabat::cli
