#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "folmod/chart.hpp"
#include "folmod/common.hpp"
#include "folmod/field.hpp"

namespace folmod {

namespace detail {

struct GaussRule {
    std::vector<double> x;  // nodes on [-1, 1]
    std::vector<double> w;
};

inline const GaussRule& gauss_rule(int n) {
    static const GaussRule rules[] = {
        {{0.0}, {2.0}},
        {{-0.5773502691896257, 0.5773502691896257}, {1.0, 1.0}},
        {{-0.7745966692414834, 0.0, 0.7745966692414834},
         {0.5555555555555556, 0.8888888888888889, 0.5555555555555556}},
        {{-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526},
         {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538}},
        {{-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640},
         {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
          0.2369268850561891}},
    };
    if (n < 1 || n > 5) throw ConfigError("gauss_points must be in [1,5]");
    return rules[n - 1];
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Chart quadrature: tensor-product Gauss-Legendre per cell of the induced
// measure sqrt(det g) du dv. Summation order is fixed, so results are
// bit-deterministic.
// ---------------------------------------------------------------------------

template <typename F>
double integrate_chart_fn(const MetricChart& chart, F&& f, const GridSpec& grid) {
    if (grid.nu < 1 || grid.nv < 1) throw ConfigError("quadrature grid must be at least 1x1");
    const detail::GaussRule& rule = detail::gauss_rule(chart.params().gauss_points);
    const double du = chart.u_range().length() / grid.nu;
    const double dv = chart.v_range().length() / grid.nv;
    const double jac = 0.25 * du * dv;  // cell map from [-1,1]^2
    double total = 0.0;
    for (int ci = 0; ci < grid.nu; ++ci) {
        const double uc = chart.u_range().lo + (ci + 0.5) * du;
        double row = 0.0;
        for (int cj = 0; cj < grid.nv; ++cj) {
            const double vc = chart.v_range().lo + (cj + 0.5) * dv;
            double cell = 0.0;
            for (std::size_t a = 0; a < rule.x.size(); ++a) {
                const double up = uc + 0.5 * du * rule.x[a];
                for (std::size_t b = 0; b < rule.x.size(); ++b) {
                    const double vp = vc + 0.5 * dv * rule.x[b];
                    const Point p{up, vp};
                    cell += rule.w[a] * rule.w[b] * f(p) * chart.sqrt_det(p);
                }
            }
            row += cell;
        }
        total += row * jac;
    }
    return total;
}

inline double integrate_chart(const MetricChart& chart, const ScalarField& f,
                              const GridSpec& grid) {
    return integrate_chart_fn(
        chart, [&](const Point& p) { return f(p); }, grid);
}

// ---------------------------------------------------------------------------
// Curve: an ordered polyline with induced-measure quadrature weights.
// Weights are arc-length shares of the samples (midpoint rule), so their sum
// equals the metric length of the polyline by construction.
// ---------------------------------------------------------------------------

struct Curve {
    std::vector<Point> samples;
    std::vector<double> arc_weights;
    std::vector<Vec2> tangents;  // unit leaf tangents at the samples (may be empty)
    bool closed = false;
    double level = 0.0;  // submersion value for traced leaves

    double length() const {
        double s = 0.0;
        for (double w : arc_weights) s += w;
        return s;
    }
};

/// Fill arc_weights from the sample polyline (wrap-around segment included
/// for closed curves).
inline void assign_arc_weights(const MetricChart& chart, Curve& curve) {
    const std::size_t n = curve.samples.size();
    curve.arc_weights.assign(n, 0.0);
    if (n < 2) return;
    std::vector<double> seg(curve.closed ? n : n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
        seg[i] = chart.segment_length(curve.samples[i], curve.samples[i + 1]);
    if (curve.closed) seg[n - 1] = chart.segment_length(curve.samples[n - 1], curve.samples[0]);
    if (curve.closed) {
        for (std::size_t i = 0; i < n; ++i)
            curve.arc_weights[i] = 0.5 * (seg[(i + n - 1) % n] + seg[i]);
    } else {
        curve.arc_weights[0] = 0.5 * seg[0];
        for (std::size_t i = 1; i + 1 < n; ++i)
            curve.arc_weights[i] = 0.5 * (seg[i - 1] + seg[i]);
        curve.arc_weights[n - 1] = 0.5 * seg[n - 2];
    }
}

template <typename F>
double integrate_curve_fn(const Curve& curve, F&& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < curve.samples.size(); ++i)
        s += f(curve.samples[i]) * curve.arc_weights[i];
    return s;
}

inline double integrate_curve(const Curve& curve, const ScalarField& f) {
    return integrate_curve_fn(curve, [&](const Point& p) { return f(p); });
}

}  // namespace folmod
