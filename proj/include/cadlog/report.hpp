#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cadlog/core.hpp"

// Experiment reports and their CSV/SVG renderers. Reports carry
// pre-formatted cells so that rendering is byte-deterministic; the config
// that produced a report is embedded as leading `# key=value` lines and
// round-trips through parse_report_config.

namespace cadlog {

// Floats are printed with 6 significant digits everywhere.
inline std::string fmt_g6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string fmt_int(long long v) { return std::to_string(v); }

struct ExperimentReport {
    std::string name;  // histogram | linear_pva | band_sweep | stability | prefix_sweep | baseline
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::uint64_t seed_base = 0;
};

// ---------------------------------------------------------------------------
// CSV.

inline std::string render_csv(const ExperimentReport& r) {
    std::string out;
    out += "# report=" + r.name + "\n";
    for (const auto& [k, v] : r.config) out += "# " + k + "=" + v + "\n";
    for (std::size_t i = 0; i < r.columns.size(); ++i) {
        if (i) out.push_back(',');
        out += r.columns[i];
    }
    out.push_back('\n');
    for (const auto& row : r.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out.push_back(',');
            out += row[i];
        }
        out.push_back('\n');
    }
    return out;
}

struct ParsedReportHeader {
    std::string name;
    std::vector<std::pair<std::string, std::string>> config;
};

// Reads the `# key=value` preamble back out of a rendered CSV.
inline ParsedReportHeader parse_report_config(std::string_view csv) {
    ParsedReportHeader out;
    std::size_t pos = 0;
    while (pos < csv.size() && csv[pos] == '#') {
        std::size_t eol = csv.find('\n', pos);
        if (eol == std::string_view::npos) eol = csv.size();
        std::string_view line = csv.substr(pos, eol - pos);
        line.remove_prefix(line.size() > 1 && line[1] == ' ' ? 2 : 1);
        std::size_t eq = line.find('=');
        if (eq != std::string_view::npos) {
            std::string key(line.substr(0, eq));
            std::string val(line.substr(eq + 1));
            if (key == "report" && out.name.empty()) out.name = val;
            else out.config.emplace_back(std::move(key), std::move(val));
        }
        pos = eol + 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// SVG. A minimal deterministic chart emitter: one plot area with axes,
// tick labels at the extremes, and circle markers or bars per data row.

namespace svg {

inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

struct LinearScale {
    double d0 = 0, d1 = 1;  // data range
    double p0 = 0, p1 = 1;  // pixel range

    double operator()(double v) const {
        if (d1 == d0) return (p0 + p1) / 2.0;
        return p0 + (v - d0) * (p1 - p0) / (d1 - d0);
    }
};

struct Chart {
    static constexpr double kWidth = 640, kHeight = 420;
    static constexpr double kLeft = 70, kRight = 610, kTop = 50, kBottom = 370;

    std::string body;
    LinearScale x, y;

    Chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
          double xmin, double xmax, double ymin, double ymax) {
        if (xmax <= xmin) xmax = xmin + 1;
        if (ymax <= ymin) ymax = ymin + 1;
        x = {xmin, xmax, kLeft, kRight};
        y = {ymin, ymax, kBottom, kTop};  // pixel y grows downward
        body += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"420\" fill=\"white\"/>\n";
        body += "<text x=\"320\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                "font-size=\"16\">" + title + "</text>\n";
        line(kLeft, kBottom, kRight, kBottom, "#000");
        line(kLeft, kBottom, kLeft, kTop, "#000");
        text((kLeft + kRight) / 2, 405, xlabel, "middle");
        body += "<text x=\"18\" y=\"210\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                "font-size=\"13\" transform=\"rotate(-90 18 210)\">" + ylabel + "</text>\n";
        text(kLeft, kBottom + 18, fmt_g6(xmin), "middle");
        text(kRight, kBottom + 18, fmt_g6(xmax), "middle");
        text(kLeft - 6, kBottom + 4, fmt_g6(ymin), "end");
        text(kLeft - 6, kTop + 4, fmt_g6(ymax), "end");
    }

    void line(double x1, double y1, double x2, double y2, const std::string& color) {
        body += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) +
                "\" y2=\"" + num(y2) + "\" stroke=\"" + color + "\"/>\n";
    }

    void text(double px, double py, const std::string& s, const std::string& anchor) {
        body += "<text x=\"" + num(px) + "\" y=\"" + num(py) + "\" text-anchor=\"" + anchor +
                "\" font-family=\"sans-serif\" font-size=\"13\">" + s + "</text>\n";
    }

    void marker(double dx, double dy, const std::string& color) {
        body += "<circle cx=\"" + num(x(dx)) + "\" cy=\"" + num(y(dy)) +
                "\" r=\"4\" fill=\"" + color + "\"/>\n";
    }

    void bar(double dx0, double dx1, double dy, const std::string& color) {
        double px0 = x(dx0), px1 = x(dx1), py = y(dy);
        body += "<rect x=\"" + num(px0) + "\" y=\"" + num(py) + "\" width=\"" +
                num(px1 - px0) + "\" height=\"" + num(kBottom - py) + "\" fill=\"" + color +
                "\" stroke=\"white\"/>\n";
    }

    void hline(double dy, const std::string& color) {
        line(kLeft, y(dy), kRight, y(dy), color);
    }

    std::string finish() const {
        return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" "
               "viewBox=\"0 0 640 420\">\n" + body + "</svg>\n";
    }
};

}  // namespace svg

namespace detail {

inline int column_index(const ExperimentReport& r, std::string_view name) {
    for (std::size_t i = 0; i < r.columns.size(); ++i)
        if (r.columns[i] == name) return static_cast<int>(i);
    return -1;
}

inline bool cell_number(const std::vector<std::string>& row, int col, double& out) {
    if (col < 0 || static_cast<std::size_t>(col) >= row.size() || row[col].empty()) return false;
    out = std::strtod(row[col].c_str(), nullptr);
    return true;
}

inline std::string config_value(const ExperimentReport& r, std::string_view key) {
    for (const auto& [k, v] : r.config)
        if (k == key) return v;
    return "";
}

}  // namespace detail

inline std::string render_svg(const ExperimentReport& r) {
    using detail::cell_number;
    using detail::column_index;

    if (r.rows.empty()) throw DomainError("render_svg: empty report");

    if (r.name == "histogram") {
        int lo = column_index(r, "bin_low"), hi = column_index(r, "bin_high"),
            ct = column_index(r, "count");
        double xmin = 0, xmax = 0, ymax = 1;
        int outliers = 0;
        bool first = true;
        for (const auto& row : r.rows) {
            double a, b, c;
            if (!cell_number(row, lo, a) || !cell_number(row, hi, b) || !cell_number(row, ct, c))
                continue;
            if (a == b) {  // outlier rows carry the bare energy value
                ++outliers;
                continue;
            }
            if (first) { xmin = a; xmax = b; first = false; }
            xmin = std::min(xmin, a);
            xmax = std::max(xmax, b);
            ymax = std::max(ymax, c);
        }
        svg::Chart chart("final net energy histogram", "net energy (kWh/year)", "students",
                         xmin, xmax, 0, ymax);
        for (const auto& row : r.rows) {
            double a, b, c;
            if (!cell_number(row, lo, a) || !cell_number(row, hi, b) || !cell_number(row, ct, c))
                continue;
            if (a == b) continue;
            chart.bar(a, b, c, "#4477aa");
        }
        if (outliers > 0)
            chart.text(svg::Chart::kRight, svg::Chart::kTop - 8,
                       std::to_string(outliers) + " outlier value(s) off scale", "end");
        return chart.finish();
    }

    if (r.name == "linear_pva") {
        int ac = column_index(r, "actual_kwh"), pr = column_index(r, "predicted_kwh");
        double ymin = 0, ymax = 0;
        bool first = true;
        for (const auto& row : r.rows)
            for (int col : {ac, pr}) {
                double v;
                if (!cell_number(row, col, v)) continue;
                if (first) { ymin = ymax = v; first = false; }
                ymin = std::min(ymin, v);
                ymax = std::max(ymax, v);
            }
        svg::Chart chart("actual vs predicted final net energy", "test student", "kWh/year",
                         0, static_cast<double>(r.rows.size()) - 1 + 0.5, ymin, ymax);
        for (std::size_t i = 0; i < r.rows.size(); ++i) {
            double v;
            if (cell_number(r.rows[i], ac, v)) chart.marker(static_cast<double>(i), v, "#4477aa");
            if (cell_number(r.rows[i], pr, v)) chart.marker(static_cast<double>(i), v, "#ee7733");
        }
        return chart.finish();
    }

    // Generic accuracy charts: x = first column, y = test_accuracy.
    int yc = column_index(r, "test_accuracy");
    int xc = 0;
    std::string xlabel = r.columns.empty() ? "x" : r.columns[0];
    if (r.name == "prefix_sweep") xc = column_index(r, "fraction");
    double xmin = 0, xmax = 0;
    bool first = true;
    for (const auto& row : r.rows) {
        double v;
        if (!cell_number(row, xc, v)) continue;
        if (first) { xmin = xmax = v; first = false; }
        xmin = std::min(xmin, v);
        xmax = std::max(xmax, v);
    }
    svg::Chart chart(r.name, xlabel, "test accuracy", xmin, xmax, 0, 1);
    std::string baseline = detail::config_value(r, "majority_baseline");
    if (!baseline.empty()) chart.hline(std::strtod(baseline.c_str(), nullptr), "#bbbbbb");
    static const char* palette[] = {"#4477aa", "#66ccee", "#228833", "#ccbb44", "#ee6677",
                                    "#aa3377", "#bbbbbb", "#ee7733", "#009988", "#cc3311"};
    for (const auto& row : r.rows) {
        double xv, yv;
        if (!cell_number(row, xc, xv) || !cell_number(row, yc, yv)) continue;
        std::size_t ci = 0;
        if (r.name == "prefix_sweep") ci = static_cast<std::size_t>(xv * 10.0 - 0.5) % 10;
        chart.marker(xv, yv, palette[ci]);
    }
    return chart.finish();
}

inline std::string render_report(const ExperimentReport& r, std::string_view format) {
    if (r.rows.empty()) throw DomainError("render_report: empty report");
    if (format == "csv") return render_csv(r);
    if (format == "svg") return render_svg(r);
    throw DomainError("render_report: unknown format: " + std::string(format));
}

}  // namespace cadlog
