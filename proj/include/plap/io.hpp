// Output plumbing: deterministic CSV/JSON writers (17 significant digits,
// LF endings), a direct SVG plotter with a gnuplot escape hatch, FNV-1a
// config hashing, and the PLAP_LOG logger.
#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plap/continuation.hpp"
#include "plap/grid.hpp"

namespace plap {

enum class LogLevel { error = 0, info = 1, debug = 2 };

inline LogLevel log_level() {
    static LogLevel lvl = [] {
        const char* e = std::getenv("PLAP_LOG");
        if (!e) return LogLevel::error;
        const std::string s(e);
        if (s == "debug") return LogLevel::debug;
        if (s == "info") return LogLevel::info;
        return LogLevel::error;
    }();
    return lvl;
}

inline void log_msg(LogLevel lvl, const std::string& msg) {
    if (static_cast<int>(lvl) <= static_cast<int>(log_level())) {
        const char* tag = lvl == LogLevel::error ? "error"
                          : lvl == LogLevel::info ? "info"
                                                  : "debug";
        std::cerr << "[plap:" << tag << "] " << msg << "\n";
    }
}

// 17 significant digits: enough to round-trip any double bit-exactly.
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hash_hex(const std::string& data) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(data)));
    return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& body) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << body;
}

inline std::string field_csv(const Field& f) {
    std::string out = "x,value\n";
    for (int i = 0; i < f.size(); ++i)
        out += fmt17(f.grid->nodes[i]) + "," + fmt17(f.v[i]) + "\n";
    return out;
}

inline std::string branch_csv(const Branch& br) {
    std::string out = "param,energy,min_value,sup_norm,fold_flag\n";
    for (const auto& pt : br.points) {
        const bool at_fold =
            br.fold && std::abs(pt.param - br.fold->param) <= br.fold->window;
        out += fmt17(pt.param) + "," + fmt17(pt.energy) + "," +
               fmt17(pt.min_value) + "," + fmt17(pt.sup_norm) + "," +
               (at_fold ? "1" : "0") + "\n";
    }
    return out;
}

inline std::string region_csv(const RegionDiagram& rd) {
    std::string out = "lambda,kbar,ktilde1,ktilde2\n";
    for (size_t i = 0; i < rd.lambda_samples.size(); ++i)
        out += fmt17(rd.lambda_samples[i]) + "," + fmt17(rd.kbar[i]) + "," +
               fmt17(rd.ktilde1[i]) + "," + fmt17(rd.ktilde2[i]) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// SVG plot of the region diagram: lambda horizontal, k vertical, curves
// kbar, ktilde1, ktilde2, dashed gamma1 asymptote, k0 tick.
// ---------------------------------------------------------------------------

namespace detail {

struct SvgFrame {
    double x0, x1, y0, y1;  // data ranges
    double W = 640, H = 480, ml = 60, mr = 20, mt = 20, mb = 45;
    double px(double x) const {
        return ml + (x - x0) / (x1 - x0) * (W - ml - mr);
    }
    double py(double y) const {
        return H - mb - (y - y0) / (y1 - y0) * (H - mb - mt);
    }
};

inline std::string svg_polyline(const SvgFrame& fr,
                                const std::vector<std::pair<double, double>>& pts,
                                const std::string& style) {
    if (pts.empty()) return "";
    std::string s = "  <polyline fill=\"none\" " + style + " points=\"";
    for (const auto& [x, y] : pts)
        s += fmt17(fr.px(x)) + "," + fmt17(fr.py(y)) + " ";
    s += "\"/>\n";
    return s;
}

}  // namespace detail

inline std::string region_svg(const RegionDiagram& rd) {
    double kmax = 0.0, lmax = 0.0;
    for (size_t i = 0; i < rd.lambda_samples.size(); ++i) {
        lmax = std::max(lmax, rd.lambda_samples[i]);
        for (double v : {rd.kbar[i], rd.ktilde1[i], rd.ktilde2[i]})
            if (std::isfinite(v)) kmax = std::max(kmax, v);
    }
    if (std::isfinite(rd.k0)) kmax = std::max(kmax, rd.k0);
    kmax *= 1.1;
    lmax *= 1.05;
    detail::SvgFrame fr{0.0, std::max(lmax, 1e-9), 0.0, std::max(kmax, 1e-9)};

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "viewBox=\"0 0 640 480\">\n";
    s += "  <rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
    // axes
    s += "  <line x1=\"" + fmt17(fr.px(0)) + "\" y1=\"" + fmt17(fr.py(0)) +
         "\" x2=\"" + fmt17(fr.px(fr.x1)) + "\" y2=\"" + fmt17(fr.py(0)) +
         "\" stroke=\"black\"/>\n";
    s += "  <line x1=\"" + fmt17(fr.px(0)) + "\" y1=\"" + fmt17(fr.py(0)) +
         "\" x2=\"" + fmt17(fr.px(0)) + "\" y2=\"" + fmt17(fr.py(fr.y1)) +
         "\" stroke=\"black\"/>\n";
    s += "  <text x=\"" + fmt17(fr.px(fr.x1) - 50) + "\" y=\"" +
         fmt17(fr.py(0) + 30) + "\" font-size=\"14\">lambda</text>\n";
    s += "  <text x=\"" + fmt17(fr.px(0) - 40) + "\" y=\"" +
         fmt17(fr.py(fr.y1) + 12) + "\" font-size=\"14\">k</text>\n";

    auto curve = [&](const std::vector<double>& ys, const char* color,
                     const char* name) {
        std::vector<std::pair<double, double>> pts;
        for (size_t i = 0; i < rd.lambda_samples.size(); ++i)
            if (std::isfinite(ys[i])) pts.emplace_back(rd.lambda_samples[i], ys[i]);
        std::string out = detail::svg_polyline(
            fr, pts, std::string("stroke=\"") + color + "\" stroke-width=\"2\"");
        if (!pts.empty())
            out += "  <text x=\"" + fmt17(fr.px(pts.back().first) + 4) + "\" y=\"" +
                   fmt17(fr.py(pts.back().second)) + "\" font-size=\"12\" fill=\"" +
                   color + "\">" + name + "</text>\n";
        return out;
    };
    s += curve(rd.kbar, "#1f77b4", "kbar");
    s += curve(rd.ktilde1, "#d62728", "ktilde1");
    s += curve(rd.ktilde2, "#2ca02c", "ktilde2");

    if (std::isfinite(rd.gamma1) && rd.gamma1 <= fr.x1) {
        s += "  <line x1=\"" + fmt17(fr.px(rd.gamma1)) + "\" y1=\"" +
             fmt17(fr.py(0)) + "\" x2=\"" + fmt17(fr.px(rd.gamma1)) + "\" y2=\"" +
             fmt17(fr.py(fr.y1)) +
             "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
        s += "  <text x=\"" + fmt17(fr.px(rd.gamma1) - 22) + "\" y=\"" +
             fmt17(fr.py(0) + 30) + "\" font-size=\"13\">gamma1</text>\n";
    }
    if (std::isfinite(rd.k0) && rd.k0 <= fr.y1) {
        s += "  <line x1=\"" + fmt17(fr.px(0) - 5) + "\" y1=\"" +
             fmt17(fr.py(rd.k0)) + "\" x2=\"" + fmt17(fr.px(0) + 5) + "\" y2=\"" +
             fmt17(fr.py(rd.k0)) + "\" stroke=\"black\" stroke-width=\"2\"/>\n";
        s += "  <text x=\"" + fmt17(fr.px(0) - 35) + "\" y=\"" +
             fmt17(fr.py(rd.k0) + 4) + "\" font-size=\"13\">k0</text>\n";
    }
    s += "</svg>\n";
    return s;
}

inline std::string region_gnuplot(const std::string& csv_name) {
    std::string s;
    s += "set datafile separator ','\n";
    s += "set xlabel 'lambda'\nset ylabel 'k'\nset key top right\n";
    s += "plot '" + csv_name + "' using 1:2 with lines title 'kbar', \\\n";
    s += "     '" + csv_name + "' using 1:3 with lines title 'ktilde1', \\\n";
    s += "     '" + csv_name + "' using 1:4 with lines title 'ktilde2'\n";
    return s;
}

inline std::string branch_svg(const Branch& br) {
    double pmin = 1e300, pmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& pt : br.points) {
        pmin = std::min(pmin, pt.param);
        pmax = std::max(pmax, pt.param);
        ymin = std::min(ymin, pt.min_value);
        ymax = std::max(ymax, pt.sup_norm);
    }
    if (br.points.empty()) pmin = 0, pmax = 1, ymin = 0, ymax = 1;
    const double padx = 0.05 * (pmax - pmin + 1e-12);
    const double pady = 0.05 * (ymax - ymin + 1e-12);
    detail::SvgFrame fr{pmin - padx, pmax + padx, ymin - pady, ymax + pady};
    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "viewBox=\"0 0 640 480\">\n  <rect width=\"640\" height=\"480\" "
         "fill=\"white\"/>\n";
    std::vector<std::pair<double, double>> mins, sups;
    for (const auto& pt : br.points) {
        mins.emplace_back(pt.param, pt.min_value);
        sups.emplace_back(pt.param, pt.sup_norm);
    }
    s += detail::svg_polyline(fr, mins, "stroke=\"#1f77b4\" stroke-width=\"2\"");
    s += detail::svg_polyline(fr, sups, "stroke=\"#d62728\" stroke-width=\"2\"");
    if (br.fold) {
        s += "  <line x1=\"" + fmt17(fr.px(br.fold->param)) + "\" y1=\"" +
             fmt17(fr.py(fr.y0)) + "\" x2=\"" + fmt17(fr.px(br.fold->param)) +
             "\" y2=\"" + fmt17(fr.py(fr.y1)) +
             "\" stroke=\"gray\" stroke-dasharray=\"4,4\"/>\n";
    }
    s += "  <text x=\"70\" y=\"30\" font-size=\"12\" fill=\"#1f77b4\">min "
         "u</text>\n  <text x=\"70\" y=\"46\" font-size=\"12\" "
         "fill=\"#d62728\">sup |u|</text>\n";
    s += "</svg>\n";
    return s;
}

}  // namespace plap
