// Scenario configuration: INI-style `key = value` with [section] headers.
// Coefficients are `const <v>`, `expr <piecewise polynomial table>`, or
// `file <csv path>`. Parse errors carry line numbers.
#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "plap/grid.hpp"
#include "plap/problem.hpp"

namespace plap {

struct ConfigError {
    int line = 0;
    std::string message;
};

struct CoefficientSpec {
    enum class Kind { constant, expr, file } kind = Kind::constant;
    double value = 0.0;
    // expr: pieces `lo hi : a0 a1 a2 ...` separated by ';'
    struct Piece {
        double lo, hi;
        std::vector<double> coeffs;
    };
    std::vector<Piece> pieces;
    std::string path;

    double eval(double x) const {
        switch (kind) {
            case Kind::constant: return value;
            case Kind::expr: {
                for (size_t k = 0; k < pieces.size(); ++k) {
                    const auto& pc = pieces[k];
                    const bool last = (k + 1 == pieces.size());
                    if (x >= pc.lo && (x < pc.hi || (last && x <= pc.hi))) {
                        double v = 0.0, xp = 1.0;
                        for (double a : pc.coeffs) {
                            v += a * xp;
                            xp *= x;
                        }
                        return v;
                    }
                }
                return 0.0;
            }
            case Kind::file: return 0.0;  // materialized separately
        }
        return 0.0;
    }
};

struct DomainSpec {
    DomainKind kind = DomainKind::interval;
    double a = 0.0, b = 1.0;  // interval ends, or (0, R)
    int N = 1;
};

enum class Subcommand { solve, branch, regions, spectra, verify };

struct Scenario {
    // problem block
    double p = 2.0;
    double mu = 1.0;
    double lambda = 0.0;
    bool has_lambda_range = false;
    double lambda_lo = 0.0, lambda_hi = 0.0, lambda_step = 0.0;
    double k = 1.0;
    bool has_k_range = false;
    double k_lo = 0.0, k_hi = 0.0;
    CoefficientSpec c, h;
    DomainSpec domain;
    int n = 257;
    double mu_plus = -1.0, mu_minus = -1.0;  // <0: default to |mu|
    // run block
    double tol = 1e-10;
    int max_iter = 400;
    std::uint64_t seed = 1;
    int threads = 0;
    std::string out_dir = "out";
    std::string quantity = "gamma1";  // for the spectra subcommand
    std::string raw_text;             // for hashing

    GridPtr make_grid_for() const {
        return domain.kind == DomainKind::interval
                   ? make_interval_grid(domain.a, domain.b, n)
                   : make_radial_grid(domain.b, domain.N, n);
    }

    Field materialize(const CoefficientSpec& cs, const GridPtr& g) const;
    ProblemSpec problem(double lambda_value, double k_value) const;
};

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

inline bool parse_double(const std::string& s, double& out) {
    try {
        size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

inline std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

inline bool parse_coefficient(const std::string& val, CoefficientSpec& cs,
                              std::string& err) {
    auto toks = split_ws(val);
    if (toks.empty()) {
        err = "empty coefficient";
        return false;
    }
    if (toks[0] == "const") {
        if (toks.size() != 2 || !parse_double(toks[1], cs.value)) {
            err = "expected: const <value>";
            return false;
        }
        cs.kind = CoefficientSpec::Kind::constant;
        return true;
    }
    if (toks[0] == "file") {
        if (toks.size() != 2) {
            err = "expected: file <path>";
            return false;
        }
        cs.kind = CoefficientSpec::Kind::file;
        cs.path = toks[1];
        return true;
    }
    if (toks[0] == "expr") {
        cs.kind = CoefficientSpec::Kind::expr;
        const std::string body = trim(val.substr(4));
        std::stringstream ss(body);
        std::string piece;
        while (std::getline(ss, piece, ';')) {
            piece = trim(piece);
            if (piece.empty()) continue;
            const size_t colon = piece.find(':');
            if (colon == std::string::npos) {
                err = "piece needs `lo hi : coeffs`";
                return false;
            }
            auto range = split_ws(piece.substr(0, colon));
            auto coeffs = split_ws(piece.substr(colon + 1));
            CoefficientSpec::Piece pc;
            if (range.size() != 2 || !parse_double(range[0], pc.lo) ||
                !parse_double(range[1], pc.hi) || coeffs.empty()) {
                err = "piece needs `lo hi : coeffs`";
                return false;
            }
            for (const auto& cstr : coeffs) {
                double a;
                if (!parse_double(cstr, a)) {
                    err = "bad coefficient '" + cstr + "'";
                    return false;
                }
                pc.coeffs.push_back(a);
            }
            cs.pieces.push_back(pc);
        }
        if (cs.pieces.empty()) {
            err = "expr needs at least one piece";
            return false;
        }
        return true;
    }
    err = "unknown coefficient kind '" + toks[0] + "'";
    return false;
}

}  // namespace detail

inline Field Scenario::materialize(const CoefficientSpec& cs, const GridPtr& g) const {
    if (cs.kind == CoefficientSpec::Kind::file) {
        std::ifstream is(cs.path);
        if (!is) throw std::runtime_error("cannot read coefficient file " + cs.path);
        std::vector<double> xs, vs;
        std::string line;
        std::getline(is, line);  // header
        while (std::getline(is, line)) {
            const size_t comma = line.find(',');
            if (comma == std::string::npos) continue;
            xs.push_back(std::stod(line.substr(0, comma)));
            vs.push_back(std::stod(line.substr(comma + 1)));
        }
        if (xs.size() < 2)
            throw std::runtime_error("coefficient file too short: " + cs.path);
        Field f(g);
        for (int i = 0; i < g->n; ++i) {
            const double x = g->nodes[i];
            size_t j = 1;
            while (j + 1 < xs.size() && xs[j] < x) ++j;
            const double w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
            f.v[i] = (1 - w) * vs[j - 1] + w * vs[j];
        }
        return f;
    }
    return make_field(g, [&](double x) { return cs.eval(x); });
}

inline ProblemSpec Scenario::problem(double lambda_value, double k_value) const {
    ProblemSpec spec;
    spec.grid = make_grid_for();
    spec.p = p;
    spec.mu = mu;
    spec.lambda = lambda_value;
    spec.k = k_value;
    spec.c = materialize(c, spec.grid);
    spec.h = materialize(h, spec.grid);
    spec.mu_plus = mu_plus >= 0 ? mu_plus : std::max(mu, 0.0);
    spec.mu_minus = mu_minus >= 0 ? mu_minus : std::max(-mu, 0.0);
    return spec;
}

// Parse and validate; on failure returns the line-anchored error list.
inline std::optional<Scenario> parse_config(const std::string& text,
                                            Subcommand sub,
                                            std::vector<ConfigError>& errors) {
    Scenario sc;
    sc.raw_text = text;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    std::map<std::string, int> seen;

    while (std::getline(is, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                errors.push_back({lineno, "unterminated section header"});
                continue;
            }
            section = line.substr(1, line.size() - 2);
            if (section != "problem" && section != "run")
                errors.push_back({lineno, "unknown section [" + section + "]"});
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back({lineno, "expected key = value"});
            continue;
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        seen[section + "." + key] = lineno;
        std::string err;
        auto need_double = [&](double& dst) {
            if (!detail::parse_double(val, dst))
                errors.push_back({lineno, "bad number for " + key});
        };
        if (section == "problem") {
            if (key == "p") need_double(sc.p);
            else if (key == "mu") need_double(sc.mu);
            else if (key == "mu_plus") need_double(sc.mu_plus);
            else if (key == "mu_minus") need_double(sc.mu_minus);
            else if (key == "lambda") need_double(sc.lambda);
            else if (key == "lambda_range") {
                auto t = detail::split_ws(val);
                sc.has_lambda_range =
                    t.size() == 3 && detail::parse_double(t[0], sc.lambda_lo) &&
                    detail::parse_double(t[1], sc.lambda_hi) &&
                    detail::parse_double(t[2], sc.lambda_step);
                if (!sc.has_lambda_range)
                    errors.push_back({lineno, "lambda_range needs `lo hi step`"});
            } else if (key == "k") need_double(sc.k);
            else if (key == "k_range") {
                auto t = detail::split_ws(val);
                sc.has_k_range = t.size() == 2 &&
                                 detail::parse_double(t[0], sc.k_lo) &&
                                 detail::parse_double(t[1], sc.k_hi);
                if (!sc.has_k_range)
                    errors.push_back({lineno, "k_range needs `lo hi`"});
            } else if (key == "c") {
                if (!detail::parse_coefficient(val, sc.c, err))
                    errors.push_back({lineno, "c: " + err});
            } else if (key == "h") {
                if (!detail::parse_coefficient(val, sc.h, err))
                    errors.push_back({lineno, "h: " + err});
            } else if (key == "domain") {
                auto t = detail::split_ws(val);
                if (t.size() >= 1 && t[0] == "interval" && t.size() == 3 &&
                    detail::parse_double(t[1], sc.domain.a) &&
                    detail::parse_double(t[2], sc.domain.b)) {
                    sc.domain.kind = DomainKind::interval;
                    sc.domain.N = 1;
                } else if (t.size() >= 1 && t[0] == "radial" && t.size() == 3 &&
                           detail::parse_double(t[1], sc.domain.b)) {
                    sc.domain.kind = DomainKind::radial;
                    sc.domain.a = 0.0;
                    try {
                        sc.domain.N = std::stoi(t[2]);
                    } catch (...) {
                        errors.push_back({lineno, "radial needs integer N"});
                    }
                } else {
                    errors.push_back(
                        {lineno, "domain is `interval a b` or `radial R N`"});
                }
            } else if (key == "n") {
                try {
                    sc.n = std::stoi(val);
                } catch (...) {
                    errors.push_back({lineno, "bad n"});
                }
            } else {
                errors.push_back({lineno, "unknown key '" + key + "' in [problem]"});
            }
        } else if (section == "run") {
            if (key == "tol") need_double(sc.tol);
            else if (key == "max_iter") {
                try {
                    sc.max_iter = std::stoi(val);
                } catch (...) {
                    errors.push_back({lineno, "bad max_iter"});
                }
            } else if (key == "seed") {
                try {
                    sc.seed = std::stoull(val);
                } catch (...) {
                    errors.push_back({lineno, "bad seed"});
                }
            } else if (key == "threads") {
                try {
                    sc.threads = std::stoi(val);
                } catch (...) {
                    errors.push_back({lineno, "bad threads"});
                }
            } else if (key == "out") {
                sc.out_dir = val;
            } else if (key == "quantity") {
                sc.quantity = val;
            } else {
                errors.push_back({lineno, "unknown key '" + key + "' in [run]"});
            }
        } else {
            errors.push_back({lineno, "key outside a [section]"});
        }
    }

    // cross-field validation
    if (!(sc.p > 1.0)) errors.push_back({0, "need p > 1"});
    if (!(sc.mu != 0.0)) errors.push_back({0, "need mu != 0"});
    if (sc.k < 0.0) errors.push_back({0, "need k >= 0"});
    if (sc.n < 4) errors.push_back({0, "need n >= 4"});
    if (sc.domain.kind == DomainKind::interval && !(sc.domain.a < sc.domain.b))
        errors.push_back({0, "interval needs a < b"});
    if (sc.domain.kind == DomainKind::radial &&
        (!(sc.domain.b > 0) || sc.domain.N < 2))
        errors.push_back({0, "radial needs R > 0 and N >= 2"});
    if (sc.has_lambda_range && sub == Subcommand::solve)
        errors.push_back({seen.count("problem.lambda_range")
                              ? seen["problem.lambda_range"]
                              : 0,
                          "lambda_range requires the branch subcommand"});
    if (sc.has_k_range && sub != Subcommand::regions)
        errors.push_back({seen.count("problem.k_range") ? seen["problem.k_range"] : 0,
                          "k_range requires the regions subcommand"});
    if (sub == Subcommand::branch && !sc.has_lambda_range)
        errors.push_back({0, "branch requires lambda_range"});

    if (errors.empty()) {
        // materialize on a coarse grid to check the standing assumptions
        try {
            Scenario probe = sc;
            probe.n = std::max(8, std::min(sc.n, 64));
            ProblemSpec spec = probe.problem(sc.lambda, sc.k);
            spec.validate();
            if (!(sc.mu > 0.0) && sub != Subcommand::spectra)
                errors.push_back({0, "constant-mu pipelines need mu > 0"});
        } catch (const std::exception& e) {
            errors.push_back({0, e.what()});
        }
    }
    if (!errors.empty()) return std::nullopt;
    return sc;
}

inline std::optional<Scenario> parse_config_file(const std::string& path,
                                                 Subcommand sub,
                                                 std::vector<ConfigError>& errors) {
    std::ifstream is(path);
    if (!is) {
        errors.push_back({0, "cannot open config " + path});
        return std::nullopt;
    }
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str(), sub, errors);
}

}  // namespace plap
