#pragma once

// Flows of vector fields, pushed-forward foliations, and the first variation
// of mod_p^p, evaluated two independent ways:
//  * analytic:  -p * int f0^(p-1) ( g(grad f0, X) + f0 div_F X ) dmu
//  * finite difference: 4-point central stencil of t -> mod_p(F_t)^p, where
//    F_t carries the submersion phi o (flow of X at time -t) and its Jacobian
//    is computed directly from that composition.

#include <cmath>
#include <utility>
#include <vector>

#include "folmod/chart.hpp"
#include "folmod/common.hpp"
#include "folmod/field.hpp"
#include "folmod/foliation.hpp"
#include "folmod/geometry.hpp"
#include "folmod/quadrature.hpp"

namespace folmod {

// ---------------------------------------------------------------------------
// Flow: RK4 integration of dx/dt = X(x) at fixed time step. Periodic
// coordinates are wrapped after every step (the fields we flow are periodic
// or vanish near the seam, so wrapping is transparent).
// ---------------------------------------------------------------------------

class Flow {
public:
    Flow() = default;
    Flow(MetricChart chart, VectorField X, double h_step = 0.0)
        : chart_(std::move(chart)), x_(std::move(X)) {
        h_ = h_step > 0.0 ? h_step : chart_.params().flow_step;
    }

    const MetricChart& chart() const { return chart_; }
    const VectorField& field() const { return x_; }
    double step() const { return h_; }

    Point at(double t, Point p) const {
        if (t == 0.0) return p;
        const int n = std::max(1, static_cast<int>(std::ceil(std::abs(t) / h_)));
        const double h = t / n;
        for (int i = 0; i < n; ++i) {
            const Vec2 k1 = x_(p);
            const Vec2 k2 = x_(chart_.wrap(p + k1 * (0.5 * h)));
            const Vec2 k3 = x_(chart_.wrap(p + k2 * (0.5 * h)));
            const Vec2 k4 = x_(chart_.wrap(p + k3 * h));
            p = chart_.wrap(p + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0));
        }
        return p;
    }

private:
    MetricChart chart_;
    VectorField x_;
    double h_ = 1e-3;
};

inline Point flow_point(const Flow& flow, double t, const Point& p) { return flow.at(t, p); }

// ---------------------------------------------------------------------------
// Tangent stretch of the flow along a leaf: J^T at a leaf point is the metric
// norm of the pushforward of the unit leaf tangent (tangent map by central
// differences of the flow map).
// ---------------------------------------------------------------------------

inline double leaf_jacobian_at(const Flow& flow, double t, const Point& pt, const Vec2& tangent) {
    const MetricChart& chart = flow.chart();
    const double delta = chart.params().h_pushforward;
    const Point ya = flow.at(t, pt + tangent * delta);
    const Point yb = flow.at(t, pt - tangent * delta);
    const Vec2 d = chart.displacement(ya, yb) / (2.0 * delta);
    const double j = chart.metric_at(flow.at(t, pt)).norm(d);
    if (!(j > 1e-12) || !std::isfinite(j))
        throw NumericError("tangent map degenerate along the flow");
    return j;
}

inline std::vector<double> leaf_jacobian(const Flow& flow, double t, const Curve& leaf) {
    if (leaf.tangents.size() != leaf.samples.size())
        throw NumericError("leaf_jacobian: curve carries no tangents");
    std::vector<double> out(leaf.samples.size());
    for (std::size_t i = 0; i < leaf.samples.size(); ++i)
        out[i] = leaf_jacobian_at(flow, t, leaf.samples[i], leaf.tangents[i]);
    return out;
}

/// d/dt J^T(t) at t = 0 by a 4-point central stencil; equals the leafwise
/// divergence of the flowed field at the point.
inline double leaf_jacobian_rate(const Flow& flow, const Point& pt, const Vec2& tangent,
                                 double h_t = 5e-3) {
    const double jp1 = leaf_jacobian_at(flow, h_t, pt, tangent);
    const double jm1 = leaf_jacobian_at(flow, -h_t, pt, tangent);
    const double jp2 = leaf_jacobian_at(flow, 2.0 * h_t, pt, tangent);
    const double jm2 = leaf_jacobian_at(flow, -2.0 * h_t, pt, tangent);
    return (8.0 * (jp1 - jm1) - (jp2 - jm2)) / (12.0 * h_t);
}

// ---------------------------------------------------------------------------
// Flowed foliation: submersion phi_t = phi o phi_flow(-t). The level range is
// pinned to the base range (a compactly supported flow permutes the chart and
// fixes the attained values).
// ---------------------------------------------------------------------------

inline SubmersionFoliation flowed_foliation(const SubmersionFoliation& base, const Flow& flow,
                                            double t) {
    const ScalarField base_phi = base.phi();
    ScalarField phi_t = ScalarField::function(
        [base_phi, flow, t](double u, double v) {
            return base_phi(flow.at(-t, Point{u, v}));
        },
        "flowed submersion");
    return SubmersionFoliation::with_pinned_range(base, std::move(phi_t));
}

// ---------------------------------------------------------------------------
// Compact-support requirement: the flow must keep the chart invariant, i.e.
// the field may not cross a non-periodic edge. (Fields tangent to an edge,
// such as the rotation field of an annulus, are admissible.)
// ---------------------------------------------------------------------------

inline double sup_norm_estimate(const MetricChart& chart, const VectorField& X, int n = 65) {
    double sup = 0.0;
    for (double u : linspace(chart.u_range().lo, chart.u_range().hi, n))
        for (double v : linspace(chart.v_range().lo, chart.v_range().hi, n))
            sup = std::max(sup, chart.metric_at({u, v}).norm(X(u, v)));
    return sup;
}

inline void require_chart_invariant(const MetricChart& chart, const VectorField& X) {
    const double sup = sup_norm_estimate(chart, X);
    const double tol = 1e-9 * (1.0 + sup);
    const int n = chart.params().probe_n;
    if (!chart.periodic_u()) {
        for (double v : linspace(chart.v_range().lo, chart.v_range().hi, n)) {
            if (std::abs(X(chart.u_range().lo, v).u) > tol ||
                std::abs(X(chart.u_range().hi, v).u) > tol)
                throw ConfigError("not compactly supported: field crosses a u-boundary");
        }
    }
    if (!chart.periodic_v()) {
        for (double u : linspace(chart.u_range().lo, chart.u_range().hi, n)) {
            if (std::abs(X(u, chart.v_range().lo).v) > tol ||
                std::abs(X(u, chart.v_range().hi).v) > tol)
                throw ConfigError("not compactly supported: field crosses a v-boundary");
        }
    }
}

// ---------------------------------------------------------------------------
// First variation, analytic side.
// ---------------------------------------------------------------------------

inline double variation_analytic(const SubmersionFoliation& fol, double p, const VectorField& X,
                                 const GridSpec& grid) {
    const MetricChart& chart = fol.chart();
    require_chart_invariant(chart, X);
    const int levels = fol.levels_for_grid(grid);
    const ExtremalFunction ext = extremal_closed_form(fol, p, levels);
    const double h_grad = chart.params().h_grad_field;
    const double integral = integrate_chart_fn(
        chart,
        [&](const Point& q) {
            const Vec2 xq = X(q);
            if (xq.u == 0.0 && xq.v == 0.0) return 0.0;  // outside the support
            const double f0 = ext.f0(q);
            const Vec2 grad_f0 = fd_gradient(
                chart, [&](const Point& r) { return ext.f0(r); }, q, h_grad);
            const double advect = chart.metric_at(q).dot(grad_f0, xq);
            const double div_leaf = div_leafwise(chart, X, fol.unit_tangent(q), q);
            return std::pow(f0, p - 1.0) * (advect + f0 * div_leaf);
        },
        grid);
    return -p * integral;
}

// ---------------------------------------------------------------------------
// First variation, finite-difference side.
// ---------------------------------------------------------------------------

struct FdVariation {
    double value = 0.0;       // 4-point stencil at step h
    double error_bar = 0.0;   // Richardson estimate |D_h - D_2h| / 15
    std::vector<std::pair<double, double>> stencil;  // (t, mod_p^p)
};

inline FdVariation variation_fd(const SubmersionFoliation& fol, double p, const VectorField& X,
                                double t_step, const GridSpec& grid) {
    const MetricChart& chart = fol.chart();
    require_chart_invariant(chart, X);
    if (!(t_step > 0.0)) throw ConfigError("variation_fd: t_step must be positive");
    // Flow step tied to the stencil: the far points integrate in two RK4
    // steps, which keeps the flow error far below the stencil truncation.
    const Flow flow(chart, X, 2.0 * t_step);
    auto mod_p_pow = [&](double t) {
        const SubmersionFoliation folt = flowed_foliation(fol, flow, t);
        if (folt.probe().degenerate)
            throw NumericError("flowed foliation fails admissibility at t=" + format_double(t));
        return std::pow(modulus_closed_form(folt, p, grid), p);
    };

    FdVariation out;
    const double h = t_step;
    for (double k : {-4.0, -2.0, -1.0, 1.0, 2.0, 4.0})
        out.stencil.emplace_back(k * h, mod_p_pow(k * h));
    auto value_at = [&](double kh) {
        for (const auto& [t, m] : out.stencil)
            if (t == kh) return m;
        throw NumericError("stencil lookup failed");
    };
    // grouped symmetric differences: equal stencil values cancel exactly
    auto stencil4 = [&](double step) {
        return (8.0 * (value_at(step) - value_at(-step)) -
                (value_at(2 * step) - value_at(-2 * step))) /
               (12.0 * step);
    };
    const double d_h = stencil4(h);
    const double d_2h = stencil4(2 * h);
    out.value = d_h;
    out.error_bar = std::abs(d_h - d_2h) / 15.0;
    return out;
}

// ---------------------------------------------------------------------------
// Combined report (both sides plus the gap).
// ---------------------------------------------------------------------------

struct VariationReport {
    double analytic = 0.0;
    double finite_difference = 0.0;
    double fd_error_bar = 0.0;
    std::vector<std::pair<double, double>> stencil;
    double relative_gap = 0.0;  // |analytic - fd| / max(|analytic|, fd_floor)
    static constexpr double fd_floor = 1e-8;
};

inline VariationReport make_variation_report(const SubmersionFoliation& fol, double p,
                                             const VectorField& X, double t_step,
                                             const GridSpec& grid) {
    VariationReport rep;
    rep.analytic = variation_analytic(fol, p, X, grid);
    FdVariation fd = variation_fd(fol, p, X, t_step, grid);
    rep.finite_difference = fd.value;
    rep.fd_error_bar = fd.error_bar;
    rep.stencil = std::move(fd.stencil);
    rep.relative_gap = std::abs(rep.analytic - rep.finite_difference) /
                       std::max(std::abs(rep.analytic), VariationReport::fd_floor);
    return rep;
}

// ---------------------------------------------------------------------------
// Linearity of the variation in the field. Returns the additivity defect
// normalized by the magnitude integral of the combined field.
// ---------------------------------------------------------------------------

inline VectorField add_fields(const VectorField& a, const VectorField& b) {
    return VectorField(
        ScalarField::function([a, b](double u, double v) { return a(u, v).u + b(u, v).u; },
                              "sum.u"),
        ScalarField::function([a, b](double u, double v) { return a(u, v).v + b(u, v).v; },
                              "sum.v"));
}

inline double variation_linearity_check(const SubmersionFoliation& fol, double p,
                                        const VectorField& X1, const VectorField& X2,
                                        const GridSpec& grid) {
    const VectorField X12 = add_fields(X1, X2);
    const double v1 = variation_analytic(fol, p, X1, grid);
    const double v2 = variation_analytic(fol, p, X2, grid);
    const double v12 = variation_analytic(fol, p, X12, grid);

    // normalizing scale: same integral with absolute values
    const MetricChart& chart = fol.chart();
    const int levels = fol.levels_for_grid(grid);
    const ExtremalFunction ext = extremal_closed_form(fol, p, levels);
    const double h_grad = chart.params().h_grad_field;
    const double scale = p * integrate_chart_fn(
                                 chart,
                                 [&](const Point& q) {
                                     const Vec2 xq = X12(q);
                                     if (xq.u == 0.0 && xq.v == 0.0) return 0.0;
                                     const double f0 = ext.f0(q);
                                     const Vec2 grad_f0 = fd_gradient(
                                         chart, [&](const Point& r) { return ext.f0(r); }, q,
                                         h_grad);
                                     const double advect =
                                         std::abs(chart.metric_at(q).dot(grad_f0, xq));
                                     const double div_leaf =
                                         std::abs(div_leafwise(chart, X12, fol.unit_tangent(q), q));
                                     return std::pow(f0, p - 1.0) * (advect + f0 * div_leaf);
                                 },
                                 grid);
    return std::abs(v12 - v1 - v2) / std::max(scale, 1e-12);
}

}  // namespace folmod
