#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "folmod/common.hpp"
#include "folmod/expr.hpp"

namespace folmod {

// ---------------------------------------------------------------------------
// Grid samples with bilinear interpolation. Values live on (nu+1) x (nv+1)
// nodes (nv columns when v-periodic). `value_period`, when set, unwraps the
// four cell corners modulo that period before interpolating; this keeps
// angle-like fields usable across their wrap seam.
// ---------------------------------------------------------------------------

struct GridSamples {
    Interval u_range;
    Interval v_range;
    int nu = 0;  // cells in u
    int nv = 0;  // cells in v
    bool periodic_v = false;
    double value_period = 0.0;  // 0 = plain values
    std::vector<double> values;  // row-major: index = i * v_nodes + j

    int u_nodes() const { return nu + 1; }
    int v_nodes() const { return periodic_v ? nv : nv + 1; }

    double& at(int i, int j) { return values[static_cast<std::size_t>(i * v_nodes() + j)]; }
    double at(int i, int j) const { return values[static_cast<std::size_t>(i * v_nodes() + j)]; }

    double eval(double u, double v) const {
        const double du = u_range.length() / nu;
        const double dv = v_range.length() / nv;
        double x = (u - u_range.lo) / du;
        double y;
        if (periodic_v) {
            y = (wrap_periodic(v, v_range.lo, v_range.hi) - v_range.lo) / dv;
        } else {
            y = (v - v_range.lo) / dv;
        }
        int i = static_cast<int>(std::floor(x));
        int j = static_cast<int>(std::floor(y));
        i = std::max(0, std::min(i, nu - 1));
        j = std::max(0, std::min(j, periodic_v ? nv - 1 : nv - 1));
        const double fx = x - i;
        const double fy = y - j;
        const int jn = periodic_v ? (j + 1) % nv : j + 1;
        double c00 = at(i, j);
        double c01 = at(i, jn);
        double c10 = at(i + 1, j);
        double c11 = at(i + 1, jn);
        if (value_period > 0.0) {
            // Unwrap relative to the first corner.
            auto unwrap = [&](double val) {
                return c00 + periodic_diff(val, c00, value_period);
            };
            c01 = unwrap(c01);
            c10 = unwrap(c10);
            c11 = unwrap(c11);
        }
        const double a = c00 * (1 - fx) * (1 - fy) + c10 * fx * (1 - fy) + c01 * (1 - fx) * fy +
                         c11 * fx * fy;
        return a;
    }
};

// ---------------------------------------------------------------------------
// ScalarField: closed-form expression, grid samples, or an arbitrary callable
// (used internally for derived quantities such as extremal functions).
// Copies share the underlying representation; the shared address doubles as a
// cache identity for leaf-integral memoization.
// ---------------------------------------------------------------------------

class ScalarField {
public:
    using Fn = std::function<double(double, double)>;

    ScalarField() = default;

    static ScalarField expression(Expr e) {
        auto impl = std::make_shared<Impl>();
        impl->kind = Kind::Expression;
        impl->expr = std::move(e);
        return ScalarField(std::move(impl));
    }

    static ScalarField expression(const std::string& src) { return expression(Expr::parse(src)); }

    static ScalarField grid(GridSamples g) {
        auto impl = std::make_shared<Impl>();
        impl->kind = Kind::Grid;
        impl->grid = std::move(g);
        return ScalarField(std::move(impl));
    }

    static ScalarField function(Fn fn, std::string label = "<callable>") {
        auto impl = std::make_shared<Impl>();
        impl->kind = Kind::Callable;
        impl->fn = std::move(fn);
        impl->label = std::move(label);
        return ScalarField(std::move(impl));
    }

    static ScalarField constant(double c) {
        auto impl = std::make_shared<Impl>();
        impl->kind = Kind::Constant;
        impl->constant = c;
        return ScalarField(std::move(impl));
    }

    double operator()(double u, double v) const {
        const Impl& im = *impl_;
        switch (im.kind) {
            case Kind::Constant: return im.constant;
            case Kind::Expression: return im.expr.eval(u, v);
            case Kind::Grid: return im.grid.eval(u, v);
            case Kind::Callable: return im.fn(u, v);
        }
        return 0.0;
    }

    double operator()(const Point& p) const { return (*this)(p.u, p.v); }

    bool valid() const { return static_cast<bool>(impl_); }

    /// Stable identity of the shared representation (memoization key).
    const void* key() const { return impl_.get(); }

    bool is_grid() const { return impl_ && impl_->kind == Kind::Grid; }
    const GridSamples* grid_data() const {
        return is_grid() ? &impl_->grid : nullptr;
    }

    /// Period of the VALUES (angle-like fields); 0 for plain fields.
    double value_period() const {
        return is_grid() ? impl_->grid.value_period : 0.0;
    }

    std::string describe() const {
        if (!impl_) return "<empty>";
        switch (impl_->kind) {
            case Kind::Constant: return format_double(impl_->constant);
            case Kind::Expression: return impl_->expr.print();
            case Kind::Grid:
                return "<grid " + std::to_string(impl_->grid.u_nodes()) + "x" +
                       std::to_string(impl_->grid.v_nodes()) + ">";
            case Kind::Callable: return impl_->label;
        }
        return "?";
    }

private:
    enum class Kind { Constant, Expression, Grid, Callable };

    struct Impl {
        Kind kind = Kind::Constant;
        double constant = 0.0;
        Expr expr;
        GridSamples grid;
        Fn fn;
        std::string label;
    };

    explicit ScalarField(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

    std::shared_ptr<const Impl> impl_;
};

// ---------------------------------------------------------------------------
// VectorField: contravariant components in chart coordinates, with an
// optional smooth compact-support descriptor. When the descriptor is present
// both components are multiplied by bump(|x - center|, r_in, r_out), so the
// field vanishes identically outside the outer radius.
// ---------------------------------------------------------------------------

struct BumpSupport {
    Point center;
    double r_in = 0.0;
    double r_out = 0.0;
};

class VectorField {
public:
    VectorField() = default;
    VectorField(ScalarField x1, ScalarField x2, std::optional<BumpSupport> support = {})
        : x1_(std::move(x1)), x2_(std::move(x2)), support_(support) {}

    static VectorField expressions(const std::string& x1, const std::string& x2,
                                   std::optional<BumpSupport> support = {}) {
        return VectorField(ScalarField::expression(x1), ScalarField::expression(x2), support);
    }

    static VectorField zero() {
        return VectorField(ScalarField::constant(0.0), ScalarField::constant(0.0));
    }

    Vec2 operator()(double u, double v) const {
        double s = 1.0;
        if (support_) {
            const double dx = u - support_->center.u;
            const double dy = v - support_->center.v;
            s = bump_cutoff(std::sqrt(dx * dx + dy * dy), support_->r_in, support_->r_out);
            if (s == 0.0) return {0.0, 0.0};
        }
        return {s * x1_(u, v), s * x2_(u, v)};
    }

    Vec2 operator()(const Point& p) const { return (*this)(p.u, p.v); }

    const std::optional<BumpSupport>& support() const { return support_; }
    const ScalarField& x1() const { return x1_; }
    const ScalarField& x2() const { return x2_; }
    bool valid() const { return x1_.valid() && x2_.valid(); }

private:
    ScalarField x1_;
    ScalarField x2_;
    std::optional<BumpSupport> support_;
};

}  // namespace folmod
