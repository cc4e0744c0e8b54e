#pragma once

// Discrete p-modulus by convex optimization, independent of the closed form:
//
//   minimize   sum_i w_i f_i^p
//   subject to <a_j, f> >= 1 for every sampled leaf j,  f >= 0,
//
// where w are node volume weights and a_j interpolates leaf quadrature onto
// the grid. Solved by dual coordinate ascent: KKT stationarity gives
// f_i = (sum_j lambda_j a_ji / (p w_i))^(1/(p-1)), and each sweep updates one
// multiplier by a safeguarded 1-D Newton solve on its own constraint. Each
// update maximizes the concave dual in that coordinate, so the dual value is
// nondecreasing and stays below the primal objective (weak duality); both
// traces are recorded for the property tests.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "folmod/chart.hpp"
#include "folmod/common.hpp"
#include "folmod/foliation.hpp"
#include "folmod/quadrature.hpp"

namespace folmod {

struct SparseRow {
    std::vector<int> idx;
    std::vector<double> val;
    double sum = 0.0;  // equals the leaf length
};

struct DiscreteModulusProblem {
    Interval u_range;
    Interval v_range;
    int nu = 0;
    int nv = 0;
    bool periodic_u = false;
    bool periodic_v = false;
    double p = 2.0;
    double q = 2.0;
    std::vector<double> node_w;
    std::vector<SparseRow> rows;

    int u_nodes() const { return periodic_u ? nu : nu + 1; }
    int v_nodes() const { return periodic_v ? nv : nv + 1; }
    int n_nodes() const { return u_nodes() * v_nodes(); }
    int node_index(int i, int j) const { return i * v_nodes() + j; }

    Point node_point(int idx) const {
        const int i = idx / v_nodes();
        const int j = idx % v_nodes();
        return {u_range.lo + i * u_range.length() / nu, v_range.lo + j * v_range.length() / nv};
    }
};

inline DiscreteModulusProblem assemble(const MetricChart& chart, const LeafFamily& family,
                                       double p, const GridSpec& grid) {
    if (!(p > 1.0)) throw ConfigError("exponent p must be > 1");
    if (family.leaves.empty()) throw ConfigError("no constraints: leaf family is empty");
    DiscreteModulusProblem prob;
    prob.u_range = chart.u_range();
    prob.v_range = chart.v_range();
    prob.nu = grid.nu;
    prob.nv = grid.nv;
    prob.periodic_u = chart.periodic_u();
    prob.periodic_v = chart.periodic_v();
    prob.p = p;
    prob.q = p / (p - 1.0);

    const double du = prob.u_range.length() / prob.nu;
    const double dv = prob.v_range.length() / prob.nv;
    prob.node_w.resize(static_cast<std::size_t>(prob.n_nodes()));
    for (int i = 0; i < prob.u_nodes(); ++i) {
        const double su = (!prob.periodic_u && (i == 0 || i == prob.nu)) ? 0.5 : 1.0;
        for (int j = 0; j < prob.v_nodes(); ++j) {
            const double sv = (!prob.periodic_v && (j == 0 || j == prob.nv)) ? 0.5 : 1.0;
            const int idx = prob.node_index(i, j);
            const Point pt = prob.node_point(idx);
            prob.node_w[static_cast<std::size_t>(idx)] =
                du * dv * su * sv * chart.sqrt_det(pt);
        }
    }

    prob.rows.reserve(family.leaves.size());
    for (const Curve& leaf : family.leaves) {
        std::map<int, double> acc;
        for (std::size_t s = 0; s < leaf.samples.size(); ++s) {
            const Point pt = chart.wrap(leaf.samples[s]);
            const double aw = leaf.arc_weights[s];
            double x = (pt.u - prob.u_range.lo) / du;
            double y = (pt.v - prob.v_range.lo) / dv;
            if (x < -1e-9 || x > prob.nu + 1e-9 || y < -1e-9 || y > prob.nv + 1e-9)
                throw NumericError("leaf sample outside the grid box");
            int i = std::clamp(static_cast<int>(std::floor(x)), 0, prob.nu - 1);
            int j = std::clamp(static_cast<int>(std::floor(y)), 0, prob.nv - 1);
            const double fx = std::clamp(x - i, 0.0, 1.0);
            const double fy = std::clamp(y - j, 0.0, 1.0);
            const int ip = prob.periodic_u ? (i + 1) % prob.nu : i + 1;
            const int jp = prob.periodic_v ? (j + 1) % prob.nv : j + 1;
            const int iw = prob.periodic_u ? i % prob.nu : i;
            const int jw = prob.periodic_v ? j % prob.nv : j;
            acc[prob.node_index(iw, jw)] += aw * (1 - fx) * (1 - fy);
            acc[prob.node_index(ip, jw)] += aw * fx * (1 - fy);
            acc[prob.node_index(iw, jp)] += aw * (1 - fx) * fy;
            acc[prob.node_index(ip, jp)] += aw * fx * fy;
        }
        SparseRow row;
        row.idx.reserve(acc.size());
        row.val.reserve(acc.size());
        for (const auto& [idx, val] : acc) {
            row.idx.push_back(idx);
            row.val.push_back(val);
            row.sum += val;
        }
        prob.rows.push_back(std::move(row));
    }
    return prob;
}

struct SolveOptions {
    double tol = 1e-8;
    int max_sweeps = 100000;
    bool record_traces = true;
};

struct SolverResult {
    double modulus = 0.0;
    double objective_p = 0.0;  // sum w f^p at the returned iterate
    std::vector<double> f;
    std::vector<double> duals;
    double kkt_residual = 0.0;
    double feasibility_min = 0.0;  // min_j <a_j, f>
    int iterations = 0;
    bool converged = false;
    std::vector<double> dual_trace;            // dual value per sweep
    std::vector<double> primal_feasible_trace; // objective of the feasibility-scaled iterate
};

inline SolverResult solve(const DiscreteModulusProblem& prob, const SolveOptions& opt = {}) {
    const double p = prob.p;
    const double beta = 1.0 / (p - 1.0);
    const std::size_t n = prob.node_w.size();
    const std::size_t m = prob.rows.size();
    if (m == 0) throw ConfigError("no constraints: leaf family is empty");

    std::vector<double> lambda(m, 1.0 / static_cast<double>(m));
    std::vector<double> s(n, 0.0);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t k = 0; k < prob.rows[j].idx.size(); ++k)
            s[static_cast<std::size_t>(prob.rows[j].idx[k])] += lambda[j] * prob.rows[j].val[k];

    auto f_of = [&](double si, double wi) { return std::pow(si / (p * wi), beta); };

    // <a_j, f> as a function of this row's multiplier, holding the rest fixed.
    auto row_constraint = [&](std::size_t j, double lam_old, double lam_new, double* deriv) {
        const SparseRow& row = prob.rows[j];
        double c = 0.0, d = 0.0;
        for (std::size_t k = 0; k < row.idx.size(); ++k) {
            const double a = row.val[k];
            const double w = prob.node_w[static_cast<std::size_t>(row.idx[k])];
            const double si = std::max(0.0, s[static_cast<std::size_t>(row.idx[k])] +
                                                (lam_new - lam_old) * a);
            const double fi = f_of(si, w);
            c += a * fi;
            if (deriv && si > 0.0) d += a * a * beta * fi / si;
        }
        if (deriv) *deriv = d;
        return c;
    };

    auto update_s = [&](std::size_t j, double delta) {
        const SparseRow& row = prob.rows[j];
        for (std::size_t k = 0; k < row.idx.size(); ++k) {
            auto& si = s[static_cast<std::size_t>(row.idx[k])];
            si = std::max(0.0, si + delta * row.val[k]);
        }
    };

    SolverResult res;
    const double inner_tol = 0.05 * opt.tol;
    int sweep = 0;
    for (; sweep < opt.max_sweeps; ++sweep) {
        for (std::size_t j = 0; j < m; ++j) {
            const double lam_old = lambda[j];
            // slack constraint: multiplier drops to zero (complementarity)
            if (row_constraint(j, lam_old, 0.0, nullptr) >= 1.0) {
                if (lam_old != 0.0) {
                    update_s(j, -lam_old);
                    lambda[j] = 0.0;
                }
                continue;
            }
            // bracket [lo, hi] with c(lo) < 1 <= c(hi)
            double lo = 0.0;
            double hi = std::max(lam_old, 1.0 / static_cast<double>(m));
            for (int it = 0; it < 200 && row_constraint(j, lam_old, hi, nullptr) < 1.0; ++it) {
                lo = hi;
                hi *= 2.0;
            }
            double lam = std::clamp(lam_old, lo, hi);
            for (int it = 0; it < 100; ++it) {
                double deriv = 0.0;
                const double c = row_constraint(j, lam_old, lam, &deriv);
                if (std::abs(c - 1.0) <= inner_tol) break;
                if (c < 1.0)
                    lo = lam;
                else
                    hi = lam;
                double next = (deriv > 0.0) ? lam - (c - 1.0) / deriv : 0.5 * (lo + hi);
                if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
                if (std::abs(next - lam) < 1e-18 * std::max(1.0, lam)) {
                    lam = next;
                    break;
                }
                lam = next;
            }
            update_s(j, lam - lam_old);
            lambda[j] = lam;
        }

        // sweep-end diagnostics
        double obj = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            obj += prob.node_w[i] * std::pow(f_of(s[i], prob.node_w[i]), p);
        double min_dot = 0.0;
        double max_slack = 0.0;
        bool first = true;
        for (std::size_t j = 0; j < m; ++j) {
            const double dot = row_constraint(j, lambda[j], lambda[j], nullptr);
            if (first || dot < min_dot) min_dot = dot;
            first = false;
            max_slack = std::max(max_slack, std::abs(lambda[j] * (dot - 1.0)));
        }
        if (opt.record_traces) {
            double lam_sum = 0.0;
            for (double l : lambda) lam_sum += l;
            res.dual_trace.push_back(lam_sum - (p - 1.0) * obj);
            const double scale = min_dot > 0.0 ? 1.0 / min_dot : 0.0;
            res.primal_feasible_trace.push_back(
                scale > 0.0 ? obj * std::pow(scale, p) : std::numeric_limits<double>::infinity());
        }
        const double violation = std::max(0.0, 1.0 - min_dot);
        res.kkt_residual = std::max(violation, max_slack);
        res.feasibility_min = min_dot;
        if (violation < opt.tol && max_slack < opt.tol) {
            res.converged = true;
            ++sweep;
            break;
        }
    }

    res.iterations = sweep;
    res.f.resize(n);
    for (std::size_t i = 0; i < n; ++i) res.f[i] = f_of(s[i], prob.node_w[i]);
    res.duals = std::move(lambda);
    res.objective_p = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        res.objective_p += prob.node_w[i] * std::pow(res.f[i], p);
    res.modulus = std::pow(res.objective_p, 1.0 / p);
    return res;
}

/// Relative L^p gap between the solver extremal function and the closed form,
/// measured with the node weights.
inline double solver_extremal_vs_closed_form(const SubmersionFoliation& fol, double p,
                                             const GridSpec& grid, int n_leaves,
                                             const SolveOptions& opt = {}) {
    const LeafFamily family = fol.sample_leaf_family(n_leaves);
    const DiscreteModulusProblem prob = assemble(fol.chart(), family, p, grid);
    const SolverResult sol = solve(prob, opt);
    const ExtremalFunction ext = extremal_closed_form(fol, p, fol.levels_for_grid(grid));
    double num = 0.0, den = 0.0;
    for (int idx = 0; idx < prob.n_nodes(); ++idx) {
        const double w = prob.node_w[static_cast<std::size_t>(idx)];
        const double f0 = ext.f0(prob.node_point(idx));
        const double fs = sol.f[static_cast<std::size_t>(idx)];
        num += w * std::pow(std::abs(fs - f0), p);
        den += w * std::pow(f0, p);
    }
    return std::pow(num / den, 1.0 / p);
}

}  // namespace folmod
