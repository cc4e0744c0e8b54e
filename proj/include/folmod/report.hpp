#pragma once

// Command dispatch and machine-readable reports. Every reported residual is
// paired with its threshold and a pass flag. Reports are deterministic for a
// fixed scenario + seed; wall-clock timing is attached only when the
// FOLMOD_TIMING environment variable is set, so that byte-identical output
// stays the default.
//
// Exit code contract: 0 all checks pass, 2 a numeric check failed its
// threshold, 3 config/schema error, 4 solver non-convergence (1 is reserved
// for unexpected computation failures).

#include <chrono>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "folmod/common.hpp"
#include "folmod/critical.hpp"
#include "folmod/flow.hpp"
#include "folmod/foliation.hpp"
#include "folmod/modsolve.hpp"
#include "folmod/quadrature.hpp"
#include "folmod/scenario.hpp"

namespace folmod {

struct RunResult {
    json report;
    int exit_code = 0;
    std::string csv;  // sidecar payload (sweep rows, or the checks table)
};

namespace detail {

class CheckList {
public:
    void add(const std::string& name, double value, double threshold, bool pass) {
        json c;
        c["name"] = name;
        c["value"] = value;
        c["threshold"] = threshold;
        c["pass"] = pass;
        checks_.push_back(std::move(c));
        all_pass_ = all_pass_ && pass;
    }
    void add_leq(const std::string& name, double value, double threshold) {
        add(name, value, threshold, value <= threshold);
    }
    const json& items() const { return checks_; }
    bool all_pass() const { return all_pass_; }

private:
    json checks_ = json::array();
    bool all_pass_ = true;
};

inline json admissibility_json(const AdmissibilityReport& rep) {
    json d;
    d["jphi_min"] = rep.jphi_min;
    d["jphi_max"] = rep.jphi_max;
    d["hat1_max"] = rep.hat1_max;
    d["volume"] = rep.volume;
    d["degenerate"] = rep.degenerate;
    if (rep.degenerate) d["degenerate_at"] = {rep.degenerate_at.u, rep.degenerate_at.v};
    d["leaves_finite"] = rep.leaves_finite;
    if (!rep.trace_error.empty()) d["trace_error"] = rep.trace_error;
    d["pass"] = rep.pass;
    return d;
}

inline std::string checks_csv(const json& checks) {
    std::ostringstream os;
    os << "name,value,threshold,pass\n";
    for (const auto& c : checks) {
        os << c.at("name").get<std::string>() << "," << format_double(c.at("value").get<double>())
           << "," << format_double(c.at("threshold").get<double>()) << ","
           << (c.at("pass").get<bool>() ? 1 : 0) << "\n";
    }
    return os.str();
}

inline double variation_t_step(const Scenario& sc) { return 1e-3 * sc.chart.diameter(); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

inline RunResult cmd_modulus(const Scenario& sc) {
    RunResult out;
    detail::CheckList checks;
    const SubmersionFoliation fol = sc.foliation();
    const AdmissibilityReport diag = admissibility_diagnostics(fol, sc.grid);
    out.report["diagnostics"] = detail::admissibility_json(diag);
    if (!diag.pass) {
        out.report["error"] = "admissibility diagnostics failed";
        out.exit_code = 2;
        return out;
    }

    const double closed = modulus_closed_form(fol, sc.p, sc.grid);
    const LeafFamily family = fol.sample_leaf_family(sc.leaves);
    const DiscreteModulusProblem prob = assemble(sc.chart, family, sc.p, sc.grid);
    SolveOptions opts;
    opts.tol = sc.tol.solver;
    opts.max_sweeps = sc.tol.max_sweeps;
    opts.record_traces = false;
    const SolverResult sol = solve(prob, opts);

    json res;
    res["modulus_closed_form"] = closed;
    res["modulus_solver"] = sol.modulus;
    res["solver_iterations"] = sol.iterations;
    res["solver_converged"] = sol.converged;
    res["solver_kkt_residual"] = sol.kkt_residual;
    res["solver_feasibility_min"] = sol.feasibility_min;

    const double gap = std::abs(closed - sol.modulus) / std::max(closed, 1e-30);
    res["gap_relative"] = gap;

    // extremal-function agreement on the solver grid
    const ExtremalFunction ext = extremal_closed_form(fol, sc.p, fol.levels_for_grid(sc.grid));
    double num = 0.0, den = 0.0;
    for (int idx = 0; idx < prob.n_nodes(); ++idx) {
        const double w = prob.node_w[static_cast<std::size_t>(idx)];
        const double f0 = ext.f0(prob.node_point(idx));
        num += w * std::pow(std::abs(sol.f[static_cast<std::size_t>(idx)] - f0), sc.p);
        den += w * std::pow(f0, sc.p);
    }
    const double fgap = std::pow(num / den, 1.0 / sc.p);
    res["extremal_gap_lp"] = fgap;
    out.report["results"] = std::move(res);

    if (!sol.converged) {
        out.report["error"] = "solver did not converge";
        out.exit_code = 4;
        return out;
    }
    checks.add_leq("modulus_gap", gap, sc.tol.modulus_gap);
    checks.add_leq("extremal_gap", fgap, sc.tol.extremal_gap);
    out.report["checks"] = checks.items();
    out.exit_code = checks.all_pass() ? 0 : 2;
    return out;
}

inline RunResult cmd_variation(const Scenario& sc) {
    if (!sc.vector_field) throw ConfigError("variation requires 'vector_field'");
    RunResult out;
    detail::CheckList checks;
    const SubmersionFoliation fol = sc.foliation();
    const VariationReport rep =
        make_variation_report(fol, sc.p, *sc.vector_field, detail::variation_t_step(sc), sc.grid);

    json res;
    res["analytic"] = rep.analytic;
    res["finite_difference"] = rep.finite_difference;
    res["fd_error_bar"] = rep.fd_error_bar;
    res["relative_gap"] = rep.relative_gap;
    const double mod0 = modulus_closed_form(fol, sc.p, sc.grid);
    res["mod_p"] = mod0;
    res["d_mod_dt"] = rep.analytic / (sc.p * std::pow(mod0, sc.p - 1.0));
    json stencil = json::array();
    for (const auto& [t, m] : rep.stencil) stencil.push_back({t, m});
    res["stencil"] = std::move(stencil);
    out.report["results"] = std::move(res);

    // agreement test: relative gap against the FD value, or both sides below
    // the floor (variation-null field on a critical foliation)
    const double fd_gap = std::abs(rep.analytic - rep.finite_difference) /
                          std::max(std::abs(rep.finite_difference), VariationReport::fd_floor);
    const bool both_null = std::abs(rep.analytic) <= sc.tol.variation_floor &&
                           std::abs(rep.finite_difference) <= sc.tol.variation_floor;
    checks.add("variation_agreement", fd_gap, sc.tol.variation_gap,
               fd_gap <= sc.tol.variation_gap || both_null);
    out.report["checks"] = checks.items();
    out.exit_code = checks.all_pass() ? 0 : 2;
    return out;
}

inline RunResult cmd_critical(const Scenario& sc) {
    RunResult out;
    const SubmersionFoliation fol = sc.foliation();
    const double crit = criticality_residual(fol, sc.p, sc.grid);
    const double tang = tangent_gradient_residual(fol, sc.p, sc.grid);
    json res;
    res["criticality_residual"] = crit;
    res["tangent_gradient_residual"] = tang;
    res["critical"] = crit <= sc.tol.criticality;
    res["threshold"] = sc.tol.criticality;
    out.report["results"] = std::move(res);
    // the verdict (critical or not) is an answer, not a failure
    out.exit_code = 0;
    return out;
}

inline RunResult cmd_pair(const Scenario& sc) {
    RunResult out;
    detail::CheckList checks;
    const SubmersionFoliation F = sc.foliation();
    OrthogonalPair pair = sc.submersion2_src
                              ? make_orthogonal_pair(F, sc.p, sc.foliation2())
                              : make_orthogonal_pair_auto(F, sc.p, sc.grid);

    const double residual = pair_product_residual(pair, sc.grid);
    const double product = pair_product_value(pair, sc.grid);
    const double holder = pair_holder_integral(pair, sc.grid);

    json res;
    res["p"] = pair.p;
    res["q"] = pair.q;
    res["auto_orthogonal"] = pair.auto_constructed;
    res["pair_product_residual"] = residual;
    res["mod_p_times_mod_q"] = product;
    res["holder_integral"] = holder;
    out.report["results"] = std::move(res);

    // auto-constructed pairs carry grid-resolution accuracy only
    const double res_tol = pair.auto_constructed ? std::max(sc.tol.pair_residual, 5e-2)
                                                 : sc.tol.pair_residual;
    checks.add_leq("pair_product_residual", residual, res_tol);
    checks.add("holder_inequality", holder - product, sc.tol.holder,
               holder <= product + sc.tol.holder);
    out.report["checks"] = checks.items();
    out.exit_code = checks.all_pass() ? 0 : 2;
    return out;
}

inline RunResult cmd_identity(const Scenario& sc) {
    if (!sc.test_function_src) throw ConfigError("identity requires 'test_function'");
    RunResult out;
    detail::CheckList checks;
    const SubmersionFoliation fol = sc.foliation();
    const ScalarField testfn = ScalarField::expression(*sc.test_function_src);
    const double residual = integral_identity_residual(fol, sc.p, testfn, sc.grid);
    out.report["results"]["identity_residual"] = residual;
    checks.add_leq("identity_residual", residual, sc.tol.identity);
    out.report["checks"] = checks.items();
    out.exit_code = checks.all_pass() ? 0 : 2;
    return out;
}

inline RunResult cmd_sweep(const Scenario& sc) {
    if (!sc.vector_field) throw ConfigError("sweep requires 'vector_field'");
    if (!sc.sweep) throw ConfigError("sweep requires a 'sweep' section");
    RunResult out;
    const SubmersionFoliation fol = sc.foliation();
    require_chart_invariant(sc.chart, *sc.vector_field);
    // flow step scaled to the sweep range (sixteen substeps to the far end)
    const double t_absmax =
        std::max(std::abs(sc.sweep->t_min), std::abs(sc.sweep->t_max));
    const Flow flow(sc.chart, *sc.vector_field,
                    std::max(sc.chart.params().flow_step, t_absmax / 16.0));
    const double m0_pow = std::pow(modulus_closed_form(fol, sc.p, sc.grid), sc.p);
    const double slope = variation_analytic(fol, sc.p, *sc.vector_field, sc.grid);

    json rows = json::array();
    std::ostringstream csv;
    csv << "t,mod_p,mod_p_pow_p,tangent_mod_p_pow_p\n";
    const auto ts = linspace(sc.sweep->t_min, sc.sweep->t_max, sc.sweep->n_steps);
    for (double t : ts) {
        double m;
        if (t == 0.0) {
            m = std::pow(m0_pow, 1.0 / sc.p);
        } else {
            m = modulus_closed_form(flowed_foliation(fol, flow, t), sc.p, sc.grid);
        }
        const double mp = std::pow(m, sc.p);
        const double tangent = m0_pow + slope * t;
        rows.push_back({t, m, mp, tangent});
        csv << format_double(t) << "," << format_double(m) << "," << format_double(mp) << ","
            << format_double(tangent) << "\n";
    }
    out.report["results"]["rows"] = std::move(rows);
    out.report["results"]["columns"] = {"t", "mod_p", "mod_p_pow_p", "tangent_mod_p_pow_p"};
    out.report["results"]["analytic_slope_mod_p_pow_p"] = slope;
    out.report["results"]["mod_p_pow_p_at_0"] = m0_pow;
    out.csv = csv.str();
    out.exit_code = 0;
    return out;
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

inline RunResult run_command(const std::string& command, const Scenario& sc) {
    const auto start = std::chrono::steady_clock::now();
    RunResult out;
    if (command == "modulus")
        out = cmd_modulus(sc);
    else if (command == "variation")
        out = cmd_variation(sc);
    else if (command == "critical")
        out = cmd_critical(sc);
    else if (command == "pair")
        out = cmd_pair(sc);
    else if (command == "identity")
        out = cmd_identity(sc);
    else if (command == "sweep")
        out = cmd_sweep(sc);
    else
        throw ConfigError("unknown command '" + command + "'");

    out.report["command"] = command;
    out.report["schema"] = 1;
    out.report["scenario_digest"] = sc.digest;
    out.report["seed"] = sc.seed;
    if (!out.report.contains("checks")) out.report["checks"] = json::array();
    bool pass = out.exit_code == 0;
    out.report["pass"] = pass;
    out.report["exit_code"] = out.exit_code;
    if (std::getenv("FOLMOD_TIMING")) {
        out.report["timing_ms"] =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count();
    }
    if (out.csv.empty()) out.csv = detail::checks_csv(out.report["checks"]);
    return out;
}

}  // namespace folmod
