#include "netrate/cli.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace netrate {

int CsvTable::column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    throw SchemaError("missing column '" + name + "'");
}

namespace {

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

bool parse_num(const std::string& s, double& v) {
    if (s.empty()) return false;
    char* end = nullptr;
    v = std::strtod(s.c_str(), &end);
    return end && *end == '\0' && std::isfinite(v);
}

struct Curve {
    std::string family;  // LB UB OR OE
    int h;
    std::vector<std::pair<double, double>> pts;
};

struct Axis {
    double lo, hi, step;
};

Axis nice_axis(double lo, double hi) {
    if (hi <= lo) hi = lo + 1.0;
    const double raw = (hi - lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    return {std::floor(lo / step) * step, std::ceil(hi / step) * step, step};
}

std::string label(double v) {
    std::string s = fmt::format("{:.4f}", v);
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    return s;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw SchemaError("cannot open " + p.string());
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw SchemaError(p.string() + " has no header row");
    t.header = split_row(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto r = split_row(line);
        if (r.size() != t.header.size()) throw SchemaError(p.string() + ": ragged row");
        t.rows.push_back(std::move(r));
    }
    return t;
}

std::string render_plot(const std::vector<CsvTable>& tables) {
    std::map<std::pair<int, std::string>, Curve> curves;  // (h, family)
    auto add = [&](const CsvTable& t, const std::string& col, const std::string& fam) {
        const int ch = t.column("h"), cd = t.column("D"), cv = t.column(col);
        for (const auto& r : t.rows) {
            double h, D, v;
            if (!parse_num(r[ch], h) || !parse_num(r[cd], D) || !parse_num(r[cv], v)) continue;
            Curve& c = curves[{static_cast<int>(h), fam}];
            c.family = fam;
            c.h = static_cast<int>(h);
            c.pts.emplace_back(D, v);
        }
    };
    for (const auto& t : tables) {
        const bool sim = std::find(t.header.begin(), t.header.end(), "rate_bits") != t.header.end() ||
                         std::find(t.header.begin(), t.header.end(), "entropy_bits") != t.header.end();
        t.column("h");
        t.column("D");
        if (sim) {
            t.column("rate_bits");
            t.column("entropy_bits");
            add(t, "rate_bits", "OR");
            add(t, "entropy_bits", "OE");
        } else {
            t.column("rate_lb_bits");
            t.column("rate_ub_bits");
            add(t, "rate_lb_bits", "LB");
            add(t, "rate_ub_bits", "UB");
        }
    }
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (auto& [k, c] : curves) {
        std::sort(c.pts.begin(), c.pts.end());
        for (const auto& [x, y] : c.pts) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (curves.empty()) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    const Axis ax = nice_axis(xmin, xmax), ay = nice_axis(std::min(ymin, 0.0), ymax);

    const double W = 720, H = 480, L = 70, R = 150, T = 30, B = 60;
    const double pw = W - L - R, ph = H - T - B;
    auto X = [&](double x) { return L + (x - ax.lo) / (ax.hi - ax.lo) * pw; };
    auto Y = [&](double y) { return T + ph - (y - ay.lo) / (ay.hi - ay.lo) * ph; };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    auto dash = [](const std::string& f) -> std::string {
        if (f == "UB") return " stroke-dasharray=\"8,4\"";
        if (f == "OR") return " stroke-dasharray=\"2,3\"";
        if (f == "OE") return " stroke-dasharray=\"10,3,2,3\"";
        return "";
    };

    std::ostringstream s;
    s << fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
                     W, H, W, H);
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", L, T,
                     pw, ph);
    s << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (double x = ax.lo; x <= ax.hi + 1e-9 * ax.step; x += ax.step)
        s << fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"#ddd\"/>"
                         "<text x=\"{0:.2f}\" y=\"{3:.2f}\" text-anchor=\"middle\">{4}</text>\n",
                         X(x), T, T + ph, T + ph + 16, label(x));
    for (double y = ay.lo; y <= ay.hi + 1e-9 * ay.step; y += ay.step)
        s << fmt::format("<line x1=\"{1:.2f}\" y1=\"{0:.2f}\" x2=\"{2:.2f}\" y2=\"{0:.2f}\" stroke=\"#ddd\"/>"
                         "<text x=\"{3:.2f}\" y=\"{4:.2f}\" text-anchor=\"end\">{5}</text>\n",
                         Y(y), L, L + pw, L - 6, Y(y) + 4, label(y));
    s << fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">D</text>\n", L + pw / 2, H - 20);
    s << fmt::format("<text x=\"16\" y=\"{:.2f}\" transform=\"rotate(-90 16 {:.2f})\" text-anchor=\"middle\">"
                     "rate (bits/sample)</text>\n",
                     T + ph / 2, T + ph / 2);
    int row = 0;
    for (const auto& [k, c] : curves) {
        const char* col = colors[static_cast<size_t>(c.h) % 6];
        std::string pts;
        for (const auto& [x, y] : c.pts) pts += fmt::format("{}{:.2f},{:.2f}", pts.empty() ? "" : " ", X(x), Y(y));
        s << fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"{} points=\"{}\"/>\n", col,
                         dash(c.family), pts);
        if (c.family == "OR" || c.family == "OE")
            for (const auto& [x, y] : c.pts)
                s << fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"2.5\" fill=\"{}\"/>\n", X(x), Y(y),
                                 c.family == "OR" ? col : "white");
        const double ly = T + 12 + 16 * row++;
        s << fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" "
                         "stroke-width=\"1.5\"{}/><text x=\"{:.2f}\" y=\"{:.2f}\">{} h={}</text>\n",
                         L + pw + 10, ly, L + pw + 40, ly, col, dash(c.family), L + pw + 46, ly + 4, c.family, c.h);
    }
    s << "</g>\n</svg>\n";
    return s.str();
}

int cmd_plot(const std::vector<std::filesystem::path>& csvs, const std::filesystem::path& out_svg) {
    std::vector<CsvTable> tables;
    for (const auto& p : csvs) tables.push_back(read_csv(p));
    const std::string svg = render_plot(tables);
    if (out_svg.has_parent_path()) std::filesystem::create_directories(out_svg.parent_path());
    std::ofstream os(out_svg, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + out_svg.string());
    os << svg;
    return kExitOk;
}

}  // namespace netrate
