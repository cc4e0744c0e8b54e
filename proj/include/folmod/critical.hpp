#pragma once

// Criticality diagnostics built on the closed-form extremal function:
//  * tangent-gradient identity:  (log f0)' along leaves = H_perp / (p-1),
//  * critical-point characterization:
//        grad(log f0^p) = p H_F + q H_perp,  1/p + 1/q = 1,
//  * the orthogonal-pair product law
//        mod_q(G)^q * f0^p = mod_p(F)^p * g0^q
//    and the product value mod_p(F) * mod_q(G).
//
// H_F / H_perp are the geodesic-curvature vectors of the leaf tangent field
// and of the orthogonal line field. Residuals are sup-norms over an interior
// node grid shrunk by two gradient stencil widths.

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

inline std::vector<Point> interior_sample_points(const MetricChart& chart, const GridSpec& grid) {
    const double margin = 2.0 * chart.params().h_grad_field;
    Interval ur = chart.u_range();
    Interval vr = chart.v_range();
    if (!chart.periodic_u()) ur = {ur.lo + margin, ur.hi - margin};
    if (!chart.periodic_v()) vr = {vr.lo + margin, vr.hi - margin};
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>((grid.nu + 1) * (grid.nv + 1)));
    const int nv = chart.periodic_v() ? grid.nv : grid.nv + 1;
    const int nu = chart.periodic_u() ? grid.nu : grid.nu + 1;
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j)
            pts.push_back({ur.lo + i * ur.length() / grid.nu, vr.lo + j * vr.length() / grid.nv});
    return pts;
}

namespace detail {

struct CurvaturePack {
    Vec2 grad_log_f0;  // contravariant gradient of log f0 (exact-leaf route)
    Vec2 h_leaf;       // curvature vector of the leaves
    Vec2 h_perp;       // curvature vector of the orthogonal line field
    Vec2 tangent;      // unit leaf tangent
};

inline CurvaturePack curvature_pack(const SubmersionFoliation& fol, double p, const Point& q) {
    const MetricChart& chart = fol.chart();
    CurvaturePack out;
    out.grad_log_f0 = extremal_log_gradient(fol, p, q);
    out.tangent = fol.unit_tangent(q);
    out.h_leaf = curve_mean_curvature_of(
        chart, [&](const Point& r) { return fol.unit_tangent(r); }, q);
    out.h_perp = curve_mean_curvature_of(
        chart, [&](const Point& r) { return fol.unit_normal(r); }, q);
    return out;
}

}  // namespace detail

/// sup_q | (grad log f0)^tangential - H_perp / (p-1) |_g over interior nodes.
inline double tangent_gradient_residual(const SubmersionFoliation& fol, double p,
                                        const GridSpec& grid) {
    if (!(p > 1.0)) throw ConfigError("exponent p must be > 1");
    const std::vector<Point> pts = interior_sample_points(fol.chart(), grid);
    std::vector<double> res(pts.size(), 0.0);
    parallel_for(pts.size(), [&](std::size_t i) {
        const Point& q = pts[i];
        const Metric2 g = fol.chart().metric_at(q);
        const detail::CurvaturePack pack = detail::curvature_pack(fol, p, q);
        const double along = g.dot(pack.grad_log_f0, pack.tangent);
        const Vec2 tang_part = pack.tangent * along;
        const Vec2 diff = tang_part - pack.h_perp / (p - 1.0);
        res[i] = g.norm(diff);
    });
    double sup = 0.0;
    for (double r : res) sup = std::max(sup, r);
    return sup;
}

/// sup_q | grad(log f0^p) - p H_F - q H_perp |_g over interior nodes.
inline double criticality_residual(const SubmersionFoliation& fol, double p,
                                   const GridSpec& grid) {
    if (!(p > 1.0)) throw ConfigError("exponent p must be > 1");
    const double q_exp = p / (p - 1.0);
    const std::vector<Point> pts = interior_sample_points(fol.chart(), grid);
    std::vector<double> res(pts.size(), 0.0);
    parallel_for(pts.size(), [&](std::size_t i) {
        const Point& q = pts[i];
        const Metric2 g = fol.chart().metric_at(q);
        const detail::CurvaturePack pack = detail::curvature_pack(fol, p, q);
        const Vec2 diff =
            pack.grad_log_f0 * p - pack.h_leaf * p - pack.h_perp * q_exp;
        res[i] = g.norm(diff);
    });
    double sup = 0.0;
    for (double r : res) sup = std::max(sup, r);
    return sup;
}

// ---------------------------------------------------------------------------
// Orthogonal pairs
// ---------------------------------------------------------------------------

struct OrthogonalPair {
    SubmersionFoliation foliation_p;  // carries exponent p
    SubmersionFoliation foliation_q;  // carries the conjugate exponent
    double p = 2.0;
    double q = 2.0;
    bool auto_constructed = false;
};

/// Validates conjugacy and pointwise orthogonality of the two tangent fields.
inline OrthogonalPair make_orthogonal_pair(const SubmersionFoliation& F, double p,
                                           const SubmersionFoliation& G,
                                           double orth_tol = 1e-8) {
    if (!(p > 1.0)) throw ConfigError("exponent p must be > 1");
    OrthogonalPair pair;
    pair.foliation_p = F;
    pair.foliation_q = G;
    pair.p = p;
    pair.q = p / (p - 1.0);
    const MetricChart& chart = F.chart();
    const int n = 33;
    const double margin = 1e-3 * chart.diameter();
    for (double u : linspace(chart.u_range().lo + margin, chart.u_range().hi - margin, n)) {
        for (double v : linspace(chart.v_range().lo + margin, chart.v_range().hi - margin, n)) {
            const Point pt{u, v};
            const double dot =
                chart.metric_at(pt).dot(F.unit_tangent(pt), G.unit_tangent(pt));
            if (std::abs(dot) > orth_tol)
                throw ConfigError("foliations not orthogonal: g(T_F, T_G) = " +
                                  format_double(dot) + " at (u,v)=(" + format_double(u) + ", " +
                                  format_double(v) + ")");
        }
    }
    return pair;
}

// ---------------------------------------------------------------------------
// Auto-construction of the orthogonal foliation: a numerical first integral
// of the gradient line field. Every grid node is transported along the unit
// normal onto a reference leaf; its label is the arc position of the landing
// point. The resulting grid field has bilinear accuracy only; explicit second
// submersions are preferred when available.
// ---------------------------------------------------------------------------

inline SubmersionFoliation auto_orthogonal_foliation(const SubmersionFoliation& F,
                                                     const GridSpec& grid) {
    const MetricChart& chart = F.chart();
    const double ref_level = F.level_range().mid();
    const Curve ref = F.find_leaf_for_level(ref_level);
    const std::size_t nref = ref.samples.size();
    if (nref < 2) throw NumericError("reference leaf too short for orthogonal construction");

    // cumulative arc positions of the reference samples
    std::vector<double> arc(nref, 0.0);
    for (std::size_t k = 1; k < nref; ++k)
        arc[k] = arc[k - 1] + chart.segment_length(ref.samples[k - 1], ref.samples[k]);
    const double ref_len = ref.closed
                               ? arc.back() + chart.segment_length(ref.samples.back(),
                                                                   ref.samples.front())
                               : arc.back();

    auto label_of_landing = [&](const Point& y) {
        std::size_t best = 0;
        double best_d = chart.metric_distance(y, ref.samples[0]);
        for (std::size_t k = 1; k < nref; ++k) {
            const double d = chart.metric_distance(y, ref.samples[k]);
            if (d < best_d) {
                best_d = d;
                best = k;
            }
        }
        // project onto the adjacent segment for sub-sample resolution
        const std::size_t next = best + 1 < nref ? best + 1 : (ref.closed ? 0 : best);
        if (next == best) return arc[best];
        const Vec2 seg = chart.displacement(ref.samples[next], ref.samples[best]);
        const Vec2 dy = chart.displacement(y, ref.samples[best]);
        const Metric2 g = chart.metric_at(ref.samples[best]);
        const double seg2 = g.dot(seg, seg);
        const double tproj = seg2 > 0.0 ? std::clamp(g.dot(dy, seg) / seg2, -1.0, 1.0) : 0.0;
        return arc[best] + tproj * std::sqrt(seg2);
    };

    const double range_len = F.level_range().length();
    const double tau_step = F.arc_step();
    const std::size_t max_steps =
        static_cast<std::size_t>(F.max_leaf_length() / tau_step) + 8;

    GridSamples psi;
    psi.u_range = chart.u_range();
    psi.v_range = chart.v_range();
    psi.nu = grid.nu;
    psi.nv = grid.nv;
    psi.periodic_v = chart.periodic_v();
    if (ref.closed) psi.value_period = ref_len;
    psi.values.assign(static_cast<std::size_t>(psi.u_nodes() * psi.v_nodes()), 0.0);

    const int un = psi.u_nodes();
    const int vn = psi.v_nodes();
    parallel_for(static_cast<std::size_t>(un * vn), [&](std::size_t idx) {
        const int i = static_cast<int>(idx) / vn;
        const int j = static_cast<int>(idx) % vn;
        Point x{psi.u_range.lo + i * psi.u_range.length() / psi.nu,
                psi.v_range.lo + j * psi.v_range.length() / psi.nv};
        double err = F.phi_at(x) - ref_level;
        // march along the unit normal toward the reference level
        for (std::size_t s = 0; s < max_steps && std::abs(err) > 1e-12 * range_len; ++s) {
            const double dir = err > 0.0 ? -1.0 : 1.0;
            Point cand = x;
            double h = tau_step;
            for (int halve = 0; halve < 60; ++halve) {
                const Vec2 n1 = F.unit_normal(x) * dir;
                const Vec2 n2 = F.unit_normal(chart.wrap(x + n1 * (0.5 * h))) * dir;
                cand = chart.wrap(x + n2 * h);
                const double cand_err = F.phi_at(cand) - ref_level;
                if ((cand_err > 0.0) == (err > 0.0) || std::abs(cand_err) < 1e-12 * range_len)
                    break;  // no overshoot (or landed)
                h *= 0.5;   // crossed the level: shrink towards it
            }
            x = cand;
            err = F.phi_at(x) - ref_level;
        }
        psi.values[idx] = label_of_landing(x);
    });

    // The label is arc length on a bilinear grid: level coherence along its
    // traced leaves is limited by the grid resolution, not by the tracer.
    // Differencing over half a cell irons out the bilinear kinks, and the
    // drift allowance scales with the label range; this foliation feeds
    // percent-level product diagnostics only.
    MetricChart g_chart = chart;
    g_chart.params().h_fd = std::max(
        chart.params().h_fd,
        0.25 * std::min(psi.u_range.length() / psi.nu, psi.v_range.length() / psi.nv));
    g_chart.params().trace_tol =
        std::max(chart.params().trace_tol, 1e-4 * std::max(1.0, ref_len));
    return SubmersionFoliation(g_chart, ScalarField::grid(std::move(psi)));
}

/// Orthogonal pair with an auto-constructed second foliation (orthogonality
/// of the constructed field holds by design up to grid resolution, so the
/// pointwise validation is skipped).
inline OrthogonalPair make_orthogonal_pair_auto(const SubmersionFoliation& F, double p,
                                                const GridSpec& grid) {
    if (!(p > 1.0)) throw ConfigError("exponent p must be > 1");
    OrthogonalPair pair;
    pair.foliation_p = F;
    pair.foliation_q = auto_orthogonal_foliation(F, grid);
    pair.p = p;
    pair.q = p / (p - 1.0);
    pair.auto_constructed = true;
    return pair;
}

// ---------------------------------------------------------------------------
// Product law
// ---------------------------------------------------------------------------

/// sup_q | mod_q(G)^q f0^p - mod_p(F)^p g0^q | / pointwise scale.
inline double pair_product_residual(const OrthogonalPair& pair, const GridSpec& grid) {
    const ExtremalFunction extF =
        extremal_closed_form(pair.foliation_p, pair.p, pair.foliation_p.levels_for_grid(grid));
    const ExtremalFunction extG =
        extremal_closed_form(pair.foliation_q, pair.q, pair.foliation_q.levels_for_grid(grid));
    const double modF = modulus_closed_form(pair.foliation_p, pair.p, grid);
    const double modG = modulus_closed_form(pair.foliation_q, pair.q, grid);
    const double mf = std::pow(modF, pair.p);
    const double mg = std::pow(modG, pair.q);
    const std::vector<Point> pts = interior_sample_points(pair.foliation_p.chart(), grid);
    std::vector<double> res(pts.size(), 0.0);
    parallel_for(pts.size(), [&](std::size_t i) {
        const Point& q = pts[i];
        const double lhs = mg * std::pow(extF.f0(q), pair.p);
        const double rhs = mf * std::pow(extG.f0(q), pair.q);
        res[i] = std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-30});
    });
    double sup = 0.0;
    for (double r : res) sup = std::max(sup, r);
    return sup;
}

inline double pair_product_value(const OrthogonalPair& pair, const GridSpec& grid) {
    return modulus_closed_form(pair.foliation_p, pair.p, grid) *
           modulus_closed_form(pair.foliation_q, pair.q, grid);
}

/// int f0 g0 dmu; by Hoelder this never exceeds mod_p(F) mod_q(G), with
/// equality exactly for critical pairs.
inline double pair_holder_integral(const OrthogonalPair& pair, const GridSpec& grid) {
    const ExtremalFunction extF =
        extremal_closed_form(pair.foliation_p, pair.p, pair.foliation_p.levels_for_grid(grid));
    const ExtremalFunction extG =
        extremal_closed_form(pair.foliation_q, pair.q, pair.foliation_q.levels_for_grid(grid));
    return integrate_chart_fn(
        pair.foliation_p.chart(),
        [&](const Point& q) { return extF.f0(q) * extG.f0(q); }, grid);
}

}  // namespace folmod
