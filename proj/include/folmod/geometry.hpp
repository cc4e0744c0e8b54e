#pragma once

// Riemannian calculus on a 2-D chart: finite-difference partials, Christoffel
// symbols, gradient, full and leafwise divergence, and the geodesic-curvature
// vector of a line field. Derivatives are central differences with step
// params().h_fd, falling back to second-order one-sided stencils at
// non-periodic boundaries (flagged via StencilInfo).

#include <cmath>

#include "folmod/chart.hpp"
#include "folmod/common.hpp"
#include "folmod/field.hpp"

namespace folmod {

struct StencilInfo {
    bool one_sided_u = false;
    bool one_sided_v = false;
};

namespace detail {

// Stencil probes evaluate f at raw (unwrapped) coordinates: expression fields
// extend periodically by themselves and grid fields wrap internally, while
// wrapping the probes would cut angle-like functions at the seam.
template <typename F>
double partial_dir(const MetricChart& chart, F&& f, const Point& pt, bool along_u, double h,
                   bool* one_sided) {
    const Interval& range = along_u ? chart.u_range() : chart.v_range();
    const bool periodic = along_u ? chart.periodic_u() : chart.periodic_v();
    const double x = along_u ? pt.u : pt.v;
    auto eval_at = [&](double t) {
        Point q = pt;
        (along_u ? q.u : q.v) = t;
        return f(q);
    };
    if (periodic || (x - h >= range.lo && x + h <= range.hi)) {
        return (eval_at(x + h) - eval_at(x - h)) / (2.0 * h);
    }
    if (one_sided) *one_sided = true;
    if (x - h < range.lo) {
        // forward: f'(x) = (-3 f(x) + 4 f(x+h) - f(x+2h)) / (2h)
        return (-3.0 * eval_at(x) + 4.0 * eval_at(x + h) - eval_at(x + 2.0 * h)) / (2.0 * h);
    }
    return (3.0 * eval_at(x) - 4.0 * eval_at(x - h) + eval_at(x - 2.0 * h)) / (2.0 * h);
}

}  // namespace detail

/// Covector of partial derivatives (d f)_i at pt.
template <typename F>
Vec2 fd_partials(const MetricChart& chart, F&& f, const Point& pt, double h,
                 StencilInfo* info = nullptr) {
    Vec2 d;
    d.u = detail::partial_dir(chart, f, pt, true, h, info ? &info->one_sided_u : nullptr);
    d.v = detail::partial_dir(chart, f, pt, false, h, info ? &info->one_sided_v : nullptr);
    return d;
}

inline Vec2 fd_partials(const MetricChart& chart, const ScalarField& f, const Point& pt,
                        StencilInfo* info = nullptr) {
    return fd_partials(
        chart, [&](const Point& q) { return f(q); }, pt, chart.params().h_fd, info);
}

/// Contravariant gradient g^{ij} d_j f. `h` defaults to params().h_fd; derived
/// fields (extremal functions) should pass params().h_grad_field instead.
template <typename F>
Vec2 fd_gradient(const MetricChart& chart, F&& f, const Point& pt, double h,
                 StencilInfo* info = nullptr) {
    const Vec2 w = fd_partials(chart, f, pt, h, info);
    return chart.metric_at(pt).raise(w);
}

inline Vec2 gradient(const MetricChart& chart, const ScalarField& f, const Point& pt,
                     StencilInfo* info = nullptr) {
    return fd_gradient(
        chart, [&](const Point& q) { return f(q); }, pt, chart.params().h_fd, info);
}

// ---------------------------------------------------------------------------
// Christoffel symbols of the Levi-Civita connection, from first derivatives
// of the metric fields:
//   Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)
// ---------------------------------------------------------------------------

struct Christoffel {
    // c[k][i][j], symmetric in (i, j); indices 0 = u, 1 = v.
    double c[2][2][2] = {};
};

inline Christoffel christoffel(const MetricChart& chart, const Point& pt,
                               StencilInfo* info = nullptr) {
    const double h = chart.params().h_fd;
    const Metric2 g0 = chart.metric_at(pt);  // also validates positive definiteness

    // dg[l][i][j] = d_l g_ij
    double dg[2][2][2];
    for (int dir = 0; dir < 2; ++dir) {
        bool* flag = info ? (dir == 0 ? &info->one_sided_u : &info->one_sided_v) : nullptr;
        const double d11 = detail::partial_dir(
            chart, [&](const Point& q) { return chart.g11_field()(q.u, q.v); }, pt, dir == 0, h,
            flag);
        const double d12 = detail::partial_dir(
            chart, [&](const Point& q) { return chart.g12_field()(q.u, q.v); }, pt, dir == 0, h,
            flag);
        const double d22 = detail::partial_dir(
            chart, [&](const Point& q) { return chart.g22_field()(q.u, q.v); }, pt, dir == 0, h,
            flag);
        dg[dir][0][0] = d11;
        dg[dir][0][1] = dg[dir][1][0] = d12;
        dg[dir][1][1] = d22;
    }

    // First kind: Gamma_ijl = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    Christoffel out;
    const double det = g0.det();
    const double ginv[2][2] = {{g0.g22 / det, -g0.g12 / det}, {-g0.g12 / det, g0.g11 / det}};
    for (int i = 0; i < 2; ++i) {
        for (int j = i; j < 2; ++j) {
            double first[2];
            for (int l = 0; l < 2; ++l)
                first[l] = 0.5 * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
            for (int k = 0; k < 2; ++k) {
                const double value = ginv[k][0] * first[0] + ginv[k][1] * first[1];
                out.c[k][i][j] = value;
                out.c[k][j][i] = value;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Divergences
// ---------------------------------------------------------------------------

/// div_M X = (1 / sqrt(det g)) d_i (sqrt(det g) X^i).
inline double div_full(const MetricChart& chart, const VectorField& X, const Point& pt,
                       StencilInfo* info = nullptr) {
    const double h = chart.params().h_fd;
    const double du = detail::partial_dir(
        chart, [&](const Point& q) { return chart.sqrt_det(q) * X(q).u; }, pt, true, h,
        info ? &info->one_sided_u : nullptr);
    const double dv = detail::partial_dir(
        chart, [&](const Point& q) { return chart.sqrt_det(q) * X(q).v; }, pt, false, h,
        info ? &info->one_sided_v : nullptr);
    return (du + dv) / chart.sqrt_det(pt);
}

/// Covariant derivative (nabla_e X)^k = e^j d_j X^k + Gamma^k_jl e^j X^l.
template <typename VF>
Vec2 covariant_derivative(const MetricChart& chart, VF&& X, const Vec2& e, const Point& pt,
                          StencilInfo* info = nullptr) {
    const double h = chart.params().h_fd;
    bool* fu = info ? &info->one_sided_u : nullptr;
    bool* fv = info ? &info->one_sided_v : nullptr;
    const double dXu_du =
        detail::partial_dir(chart, [&](const Point& q) { return X(q).u; }, pt, true, h, fu);
    const double dXu_dv =
        detail::partial_dir(chart, [&](const Point& q) { return X(q).u; }, pt, false, h, fv);
    const double dXv_du =
        detail::partial_dir(chart, [&](const Point& q) { return X(q).v; }, pt, true, h, fu);
    const double dXv_dv =
        detail::partial_dir(chart, [&](const Point& q) { return X(q).v; }, pt, false, h, fv);
    const Christoffel G = christoffel(chart, pt, info);
    const Vec2 Xp = X(pt);
    Vec2 out;
    out.u = e.u * dXu_du + e.v * dXu_dv;
    out.v = e.u * dXv_du + e.v * dXv_dv;
    const double ev[2] = {e.u, e.v};
    const double xv[2] = {Xp.u, Xp.v};
    double corr[2] = {0.0, 0.0};
    for (int k = 0; k < 2; ++k)
        for (int j = 0; j < 2; ++j)
            for (int l = 0; l < 2; ++l) corr[k] += G.c[k][j][l] * ev[j] * xv[l];
    out.u += corr[0];
    out.v += corr[1];
    return out;
}

/// Leafwise divergence for one-dimensional leaves:
/// div_F X = g(nabla_{e1} X, e1) with e1 the unit leaf tangent.
inline double div_leafwise(const MetricChart& chart, const VectorField& X,
                           const Vec2& unit_tangent, const Point& pt,
                           StencilInfo* info = nullptr) {
    const Metric2 g = chart.metric_at(pt);
    const double n = g.norm(unit_tangent);
    if (std::abs(n - 1.0) > 1e-10)
        throw NumericError("div_leafwise: tangent is not unit (|e|_g = " + format_double(n) + ")");
    const Vec2 de = covariant_derivative(
        chart, [&](const Point& q) { return X(q); }, unit_tangent, pt, info);
    return g.dot(de, unit_tangent);
}

// ---------------------------------------------------------------------------
// Geodesic-curvature vector of the integral curves of a line field: the
// component of nabla_{e1} e1 orthogonal to e1, where e1 is the normalized
// field. For a 1-D foliation this is the mean-curvature vector of the leaves.
// ---------------------------------------------------------------------------

template <typename VF>
Vec2 curve_mean_curvature_of(const MetricChart& chart, VF&& tangent_field, const Point& pt,
                             StencilInfo* info = nullptr) {
    auto unit = [&](const Point& q) -> Vec2 {
        const Vec2 t = tangent_field(q);
        const double n = chart.metric_at(q).norm(t);
        if (!(n > 1e-14))
            throw NumericError("tangent field not normalizable (zero vector) at (u,v)=(" +
                               format_double(q.u) + ", " + format_double(q.v) + ")");
        return t / n;
    };
    const Vec2 e = unit(pt);
    Vec2 acc = covariant_derivative(chart, unit, e, pt, info);
    // Remove the tangential part; analytically g(nabla_e e, e) = 0 for a unit
    // field, numerically it is FD noise.
    const Metric2 g = chart.metric_at(pt);
    const double tang = g.dot(acc, e);
    acc.u -= tang * e.u;
    acc.v -= tang * e.v;
    return acc;
}

inline Vec2 curve_mean_curvature(const MetricChart& chart, const VectorField& tangent_field,
                                 const Point& pt, StencilInfo* info = nullptr) {
    return curve_mean_curvature_of(
        chart, [&](const Point& q) { return tangent_field(q); }, pt, info);
}

}  // namespace folmod
