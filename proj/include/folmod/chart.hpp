#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "folmod/common.hpp"
#include "folmod/field.hpp"

namespace folmod {

enum class BoundaryPolicy { none, periodic_u, periodic_v };

/// 2x2 symmetric metric at a point, with the algebra the rest of the library
/// needs. Components are covariant (g_ij).
struct Metric2 {
    double g11 = 1.0;
    double g12 = 0.0;
    double g22 = 1.0;

    double det() const { return g11 * g22 - g12 * g12; }
    double sqrt_det() const { return std::sqrt(det()); }

    double dot(const Vec2& a, const Vec2& b) const {
        return g11 * a.u * b.u + g12 * (a.u * b.v + a.v * b.u) + g22 * a.v * b.v;
    }
    double norm(const Vec2& a) const { return std::sqrt(std::max(0.0, dot(a, a))); }

    /// Inverse metric applied to a covector: (g^{ij} w_j).
    Vec2 raise(const Vec2& w) const {
        const double d = det();
        return {(g22 * w.u - g12 * w.v) / d, (g11 * w.v - g12 * w.u) / d};
    }
};

// ---------------------------------------------------------------------------
// MetricChart: a closed parameter box with a smooth metric tensor field.
// One coordinate may be periodic (edges identified), e.g. the angle of an
// annulus. Carries the numeric parameters used by everything built on it.
// ---------------------------------------------------------------------------

class MetricChart {
public:
    MetricChart() = default;
    MetricChart(Interval u_range, Interval v_range, ScalarField g11, ScalarField g12,
                ScalarField g22, BoundaryPolicy policy = BoundaryPolicy::none,
                NumericParams params = {})
        : u_range_(u_range),
          v_range_(v_range),
          g11_(std::move(g11)),
          g12_(std::move(g12)),
          g22_(std::move(g22)),
          policy_(policy),
          params_(params) {
        if (!(u_range_.length() > 0.0) || !(v_range_.length() > 0.0))
            throw ConfigError("chart ranges must have positive length");
    }

    const Interval& u_range() const { return u_range_; }
    const Interval& v_range() const { return v_range_; }
    BoundaryPolicy policy() const { return policy_; }
    bool periodic_u() const { return policy_ == BoundaryPolicy::periodic_u; }
    bool periodic_v() const { return policy_ == BoundaryPolicy::periodic_v; }
    const NumericParams& params() const { return params_; }
    NumericParams& params() { return params_; }

    const ScalarField& g11_field() const { return g11_; }
    const ScalarField& g12_field() const { return g12_; }
    const ScalarField& g22_field() const { return g22_; }

    /// Coordinate-box diagonal; the length scale for steps and tolerances.
    double diameter() const {
        return std::hypot(u_range_.length(), v_range_.length());
    }

    Point wrap(Point p) const {
        if (periodic_u()) p.u = wrap_periodic(p.u, u_range_.lo, u_range_.hi);
        if (periodic_v()) p.v = wrap_periodic(p.v, v_range_.lo, v_range_.hi);
        return p;
    }

    /// Inside the closed box (periodic coordinates are always inside).
    bool contains(const Point& p, double tol = 1e-12) const {
        const bool u_ok = periodic_u() || u_range_.contains(p.u, tol);
        const bool v_ok = periodic_v() || v_range_.contains(p.v, tol);
        return u_ok && v_ok;
    }

    /// Coordinate displacement a-b with periodic components reduced.
    Vec2 displacement(const Point& a, const Point& b) const {
        Vec2 d{a.u - b.u, a.v - b.v};
        if (periodic_u()) d.u = periodic_diff(a.u, b.u, u_range_.length());
        if (periodic_v()) d.v = periodic_diff(a.v, b.v, v_range_.length());
        return d;
    }

    Metric2 metric_at(const Point& p) const {
        const Point q = wrap(p);
        Metric2 m{g11_(q.u, q.v), g12_(q.u, q.v), g22_(q.u, q.v)};
        if (!(m.g11 > 0.0) || !(m.det() > 0.0) || !std::isfinite(m.det()))
            throw NumericError("metric not positive definite at (u,v)=(" + format_double(q.u) +
                               ", " + format_double(q.v) + ")");
        return m;
    }

    double sqrt_det(const Point& p) const { return metric_at(p).sqrt_det(); }

    /// Approximate metric length of the straight chart segment a->b
    /// (midpoint metric; exact enough for polyline quadrature).
    double segment_length(const Point& a, const Point& b) const {
        const Vec2 d = displacement(b, a);
        const Point mid{a.u + 0.5 * d.u, a.v + 0.5 * d.v};
        return metric_at(mid).norm(d);
    }

    double metric_distance(const Point& a, const Point& b) const { return segment_length(a, b); }

private:
    Interval u_range_;
    Interval v_range_;
    ScalarField g11_;
    ScalarField g12_;
    ScalarField g22_;
    BoundaryPolicy policy_ = BoundaryPolicy::none;
    NumericParams params_;
};

// ---------------------------------------------------------------------------
// Builtin charts
// ---------------------------------------------------------------------------

/// Euclidean box [0,a] x [0,b].
inline MetricChart rectangle_chart(double a, double b, NumericParams params = {}) {
    if (!(a > 0.0) || !(b > 0.0)) throw ConfigError("rectangle sides must be positive");
    return MetricChart({0.0, a}, {0.0, b}, ScalarField::constant(1.0), ScalarField::constant(0.0),
                       ScalarField::constant(1.0), BoundaryPolicy::none, params);
}

/// Annulus r in [r1,r2] in polar coordinates (u = radius, v = angle):
/// g = du^2 + u^2 dv^2, v periodic on [0, 2*pi).
inline MetricChart annulus_chart(double r1, double r2, NumericParams params = {}) {
    if (!(r1 > 0.0) || !(r2 > r1)) throw ConfigError("annulus radii must satisfy 0 < r1 < r2");
    return MetricChart({r1, r2}, {0.0, 2.0 * std::numbers::pi}, ScalarField::constant(1.0),
                       ScalarField::constant(0.0), ScalarField::expression("u^2"),
                       BoundaryPolicy::periodic_v, params);
}

inline MetricChart custom_chart(Interval u_range, Interval v_range, const std::string& g11,
                                const std::string& g12, const std::string& g22,
                                BoundaryPolicy policy, NumericParams params = {}) {
    return MetricChart(u_range, v_range, ScalarField::expression(g11),
                       ScalarField::expression(g12), ScalarField::expression(g22), policy, params);
}

}  // namespace folmod
