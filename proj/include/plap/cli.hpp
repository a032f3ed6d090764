// Subcommand dispatch: solve, branch, regions, spectra, verify. Every
// output file embeds the config hash and seed; identical config + seed
// reproduce byte-identical CSV/JSON.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "plap/config.hpp"
#include "plap/continuation.hpp"
#include "plap/io.hpp"
#include "plap/pipeline.hpp"
#include "plap/spectra.hpp"
#include "plap/verify.hpp"

namespace plap {

// exit codes
inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_no_convergence = 2;
inline constexpr int exit_property_failure = 3;

namespace detail {

inline nlohmann::json run_header(const Scenario& sc) {
    nlohmann::json j;
    j["config_hash"] = hash_hex(sc.raw_text);
    j["seed"] = sc.seed;
    return j;
}

inline std::filesystem::path ensure_out(const Scenario& sc) {
    std::filesystem::path dir(sc.out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace detail

inline int run_solve(const Scenario& sc) {
    auto dir = detail::ensure_out(sc);
    ProblemSpec spec = sc.problem(sc.lambda, sc.k);
    PipelineOptions popt;
    popt.seed = sc.seed;
    popt.threads = sc.threads;
    popt.grad_tol = sc.tol;
    popt.max_iter = sc.max_iter;
    PipelineResult res = solve_Plambda(spec, popt);

    nlohmann::json j = detail::run_header(sc);
    j["subcommand"] = "solve";
    j["lambda"] = sc.lambda;
    j["k"] = sc.k;
    j["p"] = sc.p;
    j["mu"] = sc.mu;
    j["status"] = to_string(res.status);
    j["diagnostics"] = res.diagnostics;
    j["solutions"] = nlohmann::json::array();
    int idx = 0;
    for (const auto& sol : res.solutions) {
        const std::string fname = "solution_" + std::to_string(idx) + ".csv";
        write_text(dir / fname, field_csv(sol.u));
        nlohmann::json js;
        js["status"] = to_string(sol.rep.status);
        js["lineage"] = sol.rep.lineage;
        js["energy"] = sol.rep.energy;
        js["grad_norm"] = sol.rep.grad_norm;
        js["iterations"] = sol.rep.iterations;
        js["sup_norm"] = sol.u.max_abs();
        js["min_value"] = sol.u.min_value();
        js["residual_inf"] = sol.residual_P_inf;
        js["residual_Q_inf"] = sol.residual_Q_inf;
        js["above_lower_solution"] = sol.above_lower;
        js["file"] = fname;
        j["solutions"].push_back(js);
        ++idx;
    }
    if (res.status != SolveStatus::converged || res.solutions.empty())
        j["note"] =
            "non-convergence is evidence of nonexistence, never a proof";
    write_text(dir / "solve.json", j.dump(2) + "\n");
    for (const auto& d : res.diagnostics) log_msg(LogLevel::info, d);
    if (res.status != SolveStatus::converged || res.solutions.empty())
        return exit_no_convergence;
    return exit_ok;
}

inline int run_branch(const Scenario& sc) {
    auto dir = detail::ensure_out(sc);
    ProblemSpec base = sc.problem(sc.lambda_lo, sc.k);
    // seed at the starting lambda from the full pipeline
    PipelineOptions popt;
    popt.seed = sc.seed;
    popt.threads = sc.threads;
    popt.want_second = false;
    PipelineResult seed_res = solve_Plambda(base, popt);
    if (seed_res.status != SolveStatus::converged || seed_res.solutions.empty()) {
        log_msg(LogLevel::error, "branch: seed solve failed at lambda_lo");
        return exit_no_convergence;
    }
    ContinuationOptions copt;
    copt.step = sc.lambda_step;
    copt.grad_tol = sc.tol;
    copt.seed = sc.seed;
    copt.threads = sc.threads;
    Branch br = trace_lambda(base, sc.lambda_lo, sc.lambda_hi, sc.lambda_step,
                             seed_res.solutions.front().rep.solution, copt);
    auto fold = detect_fold(br);

    const std::string hash = hash_hex(sc.raw_text);
    std::string csv = "# config_hash=" + hash + " seed=" + std::to_string(sc.seed) +
                      "\n" + branch_csv(br);
    write_text(dir / "branch.csv", csv);
    write_text(dir / "branch.svg", branch_svg(br));
    write_text(dir / "branch.gp", region_gnuplot("branch.csv"));
    nlohmann::json j = detail::run_header(sc);
    j["subcommand"] = "branch";
    j["points"] = br.points.size();
    j["truncated"] = br.truncated;
    j["note"] = br.note;
    if (fold) {
        j["fold_param"] = fold->param;
        j["fold_window"] = fold->window;
    }
    write_text(dir / "branch.json", j.dump(2) + "\n");
    return br.points.empty() ? exit_no_convergence : exit_ok;
}

inline int run_regions(const Scenario& sc) {
    auto dir = detail::ensure_out(sc);
    ProblemSpec base = sc.problem(0.0, sc.k);
    RegionOptions ropt;
    ropt.pipeline.seed = sc.seed;
    ropt.pipeline.grad_tol = sc.tol;
    ropt.pipeline.max_iter = sc.max_iter;
    ropt.threads = sc.threads;

    std::vector<double> lambdas;
    if (sc.has_lambda_range) {
        for (double l = sc.lambda_lo; l <= sc.lambda_hi + 1e-12; l += sc.lambda_step)
            lambdas.push_back(l);
    } else {
        SpectralReport g1 = gamma1(base.c, base.p, base.grid, sc.seed, 12, sc.threads);
        for (int i = 1; i <= 8; ++i) {
            lambdas.push_back(g1.value * i / 9.0);
            lambdas.push_back(g1.value * (1.0 + 0.25 * i));
        }
        std::sort(lambdas.begin(), lambdas.end());
    }
    std::vector<double> kb;
    if (sc.has_k_range) kb = {sc.k_lo, sc.k_hi};

    RegionDiagram rd = region_diagram(base, lambdas, kb, ropt);
    const std::string hash = hash_hex(sc.raw_text);
    write_text(dir / "regions.csv", "# config_hash=" + hash + " seed=" +
                                        std::to_string(sc.seed) + "\n" +
                                        region_csv(rd));
    write_text(dir / "regions.svg", region_svg(rd));
    write_text(dir / "regions.gp", region_gnuplot("regions.csv"));
    nlohmann::json j = detail::run_header(sc);
    j["subcommand"] = "regions";
    j["gamma1"] = rd.gamma1;
    j["k0"] = std::isfinite(rd.k0) ? nlohmann::json(rd.k0) : nlohmann::json("+inf");
    j["unresolved"] = rd.unresolved;
    write_text(dir / "regions.json", j.dump(2) + "\n");
    return rd.unresolved.empty() ? exit_ok : exit_no_convergence;
}

inline int run_spectra(const Scenario& sc) {
    auto dir = detail::ensure_out(sc);
    ProblemSpec spec = sc.problem(sc.lambda, sc.k);
    nlohmann::json j = detail::run_header(sc);
    j["subcommand"] = "spectra";
    j["quantity"] = sc.quantity;
    j["note"] = "discrete desk-scale surrogate constants";

    auto fill = [&](const SpectralReport& rep, nlohmann::json& dst) {
        dst["value"] = rep.plus_infinity ? nlohmann::json("+inf")
                                         : nlohmann::json(rep.value);
        dst["iterations"] = rep.iterations;
        dst["residual"] = rep.residual;
        dst["seed"] = rep.seed;
        if (!rep.constraint_active.empty())
            dst["constraint"] = rep.constraint_active;
    };

    bool ok = true;
    if (sc.quantity != "gamma1" && !(sc.mu > 0.0)) {
        log_msg(LogLevel::error, "spectra quantity " + sc.quantity +
                                     " needs mu > 0");
        return exit_usage;
    }
    if (sc.quantity == "gamma1") {
        fill(gamma1(spec.c, spec.p, spec.grid, sc.seed, 20, sc.threads), j);
    } else if (sc.quantity == "m_p") {
        Field kh = scaled(spec.h, spec.k);
        fill(m_p(kh, spec.p, spec.mu, spec.grid, sc.seed, 20, sc.threads), j);
    } else if (sc.quantity == "k0") {
        fill(k0(spec.h, spec.p, spec.mu, spec.grid, sc.seed, 20, sc.threads), j);
    } else if (sc.quantity == "m_p_lambda_pm") {
        auto [mp, mm] = m_p_lambda_pm(spec, sc.seed, 20, sc.threads);
        nlohmann::json jp, jm;
        fill(mp, jp);
        fill(mm, jm);
        j["m_plus"] = jp;
        j["m_minus"] = jm;
    } else if (sc.quantity == "sufficient") {
        auto rep = appendix_sufficient(spec.h, spec.p, spec.mu, spec.grid, 2.0,
                                       sc.seed);
        j["supported"] = rep.supported;
        j["holds"] = rep.holds;
        j["margin"] = rep.margin;
        j["sobolev_constant"] = rep.sobolev_constant;
        j["case"] = rep.which_case;
        ok = rep.supported;
    } else {
        log_msg(LogLevel::error, "unknown spectra quantity " + sc.quantity);
        return exit_usage;
    }
    write_text(dir / "spectra.json", j.dump(2) + "\n");
    return ok ? exit_ok : exit_no_convergence;
}

inline int run_verify(const Scenario& sc) {
    auto dir = detail::ensure_out(sc);
    ProblemSpec spec = sc.problem(sc.lambda, sc.k);
    auto reports = run_verify_suite(spec, sc.seed, sc.threads);
    nlohmann::json arr = nlohmann::json::array();
    bool any_fail = false;
    for (const auto& r : reports) {
        nlohmann::json j;
        j["id"] = r.id;
        j["status"] = to_string(r.status);
        j["message"] = r.message;
        j["tolerance"] = r.tolerance;
        if (r.witness_index >= 0) j["witness_index"] = r.witness_index;
        if (std::isfinite(r.witness_value)) j["witness_value"] = r.witness_value;
        arr.push_back(j);
        any_fail |= (r.status == PropertyStatus::fail);
    }
    nlohmann::json j = detail::run_header(sc);
    j["subcommand"] = "verify";
    j["reports"] = arr;
    write_text(dir / "verify.json", j.dump(2) + "\n");
    return any_fail ? exit_property_failure : exit_ok;
}

inline int run_scenario(const Scenario& sc, Subcommand sub) {
    switch (sub) {
        case Subcommand::solve: return run_solve(sc);
        case Subcommand::branch: return run_branch(sc);
        case Subcommand::regions: return run_regions(sc);
        case Subcommand::spectra: return run_spectra(sc);
        case Subcommand::verify: return run_verify(sc);
    }
    return exit_usage;
}

}  // namespace plap
