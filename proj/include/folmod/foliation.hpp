#pragma once

// Submersion-defined foliations on a 2-D chart. Leaves are level sets of a
// scalar submersion phi; the Jacobian of the submersion reduces to |grad phi|
// in codimension one. The closed-form extremal function
//
//     f0 = J^(1/(p-1)) / I(level),   I(level) = integral of J^(1/(p-1))
//                                               over the leaf at that level,
//
// realizes the p-modulus, and the leafwise integral ("hat") of any bounded
// field ties the 2-D quadrature to leaf quadrature.
//
// Leaf integrals are cached two ways:
//  * an exact per-point path (trace the leaf through the point), memoized by
//    quantized level value, and
//  * a level table: leaves traced once on a fixed level grid, per-field
//    integrals interpolated by a natural cubic spline. The quadrature-heavy
//    operations (extremal function, modulus, identity residual) run on the
//    table; without it every gradient probe of f0 would trace fresh leaves.
// Tables and splines are shared snapshots, so closures built on one table
// stay valid if a finer table is built later.

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <optional>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "folmod/chart.hpp"
#include "folmod/common.hpp"
#include "folmod/field.hpp"
#include "folmod/geometry.hpp"
#include "folmod/quadrature.hpp"

namespace folmod {

// ---------------------------------------------------------------------------
// Natural cubic spline over level values (linear extrapolation past the ends).
// ---------------------------------------------------------------------------

struct LevelSpline {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> y2;

    double eval(double t) const {
        const std::size_t n = x.size();
        if (n == 0) throw NumericError("empty spline");
        if (n == 1) return y[0];
        if (t <= x.front()) return y.front() + slope_front() * (t - x.front());
        if (t >= x.back()) return y.back() + slope_back() * (t - x.back());
        const std::size_t hi =
            static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), t) - x.begin());
        const std::size_t lo = hi - 1;
        const double h = x[hi] - x[lo];
        const double a = (x[hi] - t) / h;
        const double b = (t - x[lo]) / h;
        return a * y[lo] + b * y[hi] +
               ((a * a * a - a) * y2[lo] + (b * b * b - b) * y2[hi]) * h * h / 6.0;
    }

    double slope_front() const {
        const double h = x[1] - x[0];
        return (y[1] - y[0]) / h - h * y2[1] / 6.0;
    }
    double slope_back() const {
        const std::size_t n = x.size();
        const double h = x[n - 1] - x[n - 2];
        return (y[n - 1] - y[n - 2]) / h + h * y2[n - 2] / 6.0;
    }
};

inline LevelSpline make_natural_spline(std::vector<double> xs, std::vector<double> ys) {
    LevelSpline s;
    s.x = std::move(xs);
    s.y = std::move(ys);
    const std::size_t n = s.x.size();
    s.y2.assign(n, 0.0);
    if (n < 3) return s;
    std::vector<double> u(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double sig = (s.x[i] - s.x[i - 1]) / (s.x[i + 1] - s.x[i - 1]);
        const double p = sig * s.y2[i - 1] + 2.0;
        s.y2[i] = (sig - 1.0) / p;
        const double d = (s.y[i + 1] - s.y[i]) / (s.x[i + 1] - s.x[i]) -
                         (s.y[i] - s.y[i - 1]) / (s.x[i] - s.x[i - 1]);
        u[i] = (6.0 * d / (s.x[i + 1] - s.x[i - 1]) - sig * u[i - 1]) / p;
    }
    for (std::size_t k = n - 1; k-- > 0;) s.y2[k] = s.y2[k] * s.y2[k + 1] + u[k];
    return s;
}

// ---------------------------------------------------------------------------
// Probe statistics collected at construction (never throws: the diagnostics
// operation must be able to report degenerate submersions).
// ---------------------------------------------------------------------------

struct FoliationProbe {
    Interval level_range;
    double jphi_min = 0.0;
    double jphi_max = 0.0;
    bool degenerate = false;
    Point degenerate_at;
};

/// A finite sampled set of leaves, the input format of the discrete solver.
struct LeafFamily {
    std::vector<Curve> leaves;
    std::vector<double> levels;
    std::vector<double> leaf_weights;  // level-space quadrature weights
};

/// Leaves traced on a fixed level grid spanning the attained range.
struct LeafTable {
    std::vector<double> levels;
    std::vector<Curve> curves;
};

// ---------------------------------------------------------------------------
// SubmersionFoliation. Value type: copies share one state; caches are
// mutex-guarded and snapshot-based.
// ---------------------------------------------------------------------------

class SubmersionFoliation {
public:
    SubmersionFoliation() = default;

    SubmersionFoliation(MetricChart chart, ScalarField phi) : state_(std::make_shared<State>()) {
        state_->chart = std::move(chart);
        state_->phi = std::move(phi);
        const NumericParams& np = state_->chart.params();
        state_->arc_step = np.arc_step_frac * state_->chart.diameter();
        state_->max_leaf_length = np.max_leaf_length_factor * state_->chart.diameter();
        probe_stats();
    }

    /// Flowed variant: same chart, new submersion, level range pinned to the
    /// base (a compactly supported flow cannot change the attained range).
    static SubmersionFoliation with_pinned_range(const SubmersionFoliation& base,
                                                 ScalarField phi) {
        SubmersionFoliation out(base.chart(), std::move(phi));
        out.state_->probe.level_range = base.level_range();
        return out;
    }

    bool valid() const { return static_cast<bool>(state_); }
    const MetricChart& chart() const { return state_->chart; }
    const ScalarField& phi() const { return state_->phi; }
    const FoliationProbe& probe() const { return state_->probe; }
    Interval level_range() const { return state_->probe.level_range; }
    double arc_step() const { return state_->arc_step; }
    double max_leaf_length() const { return state_->max_leaf_length; }

    double phi_at(const Point& p) const { return state_->phi(state_->chart.wrap(p)); }

    /// Difference of level values, reduced modulo the submersion's value
    /// period when it has one (angle-like label fields).
    double level_diff(double a, double b) const {
        const double period = state_->phi.value_period();
        return period > 0.0 ? periodic_diff(a, b, period) : a - b;
    }

    /// phi evaluated on the branch closest to `anchor`. Finite differences of
    /// a periodic-valued label must difference within one branch, otherwise
    /// stencils straddling the wrap seam see period-sized jumps.
    double phi_branch(const Point& q, double anchor) const {
        const double value = state_->phi(q);
        const double period = state_->phi.value_period();
        return period > 0.0 ? anchor + periodic_diff(value, anchor, period) : value;
    }

    /// Jacobian of the submersion; in codimension one this is |grad phi|_g.
    double jacobian(const Point& pt) const {
        const MetricChart& chart = state_->chart;
        if (!chart.contains(pt, 1e-9)) throw NumericError("jacobian: point outside chart");
        const double anchor = state_->phi(pt);
        const Vec2 grad = fd_gradient(
            chart, [&](const Point& q) { return phi_branch(q, anchor); }, pt,
            chart.params().h_fd);
        const double j = chart.metric_at(pt).norm(grad);
        if (!(j > chart.params().sing_tol))
            throw NumericError("submersion degenerate at (u,v)=(" + format_double(pt.u) + ", " +
                               format_double(pt.v) + ")");
        return j;
    }

    /// Unit normal grad(phi)/|grad(phi)| (contravariant).
    Vec2 unit_normal(const Point& pt) const {
        const MetricChart& chart = state_->chart;
        const double anchor = state_->phi(pt);
        const Vec2 grad = fd_gradient(
            chart, [&](const Point& q) { return phi_branch(q, anchor); }, pt,
            chart.params().h_fd);
        const double n = chart.metric_at(pt).norm(grad);
        if (!(n > chart.params().sing_tol))
            throw NumericError("submersion degenerate at (u,v)=(" + format_double(pt.u) + ", " +
                               format_double(pt.v) + ")");
        return grad / n;
    }

    /// Unit leaf tangent: the covector d(phi) rotated into its kernel.
    Vec2 unit_tangent(const Point& pt) const {
        const MetricChart& chart = state_->chart;
        const double anchor = state_->phi(pt);
        const Vec2 w = fd_partials(
            chart, [&](const Point& q) { return phi_branch(q, anchor); }, pt,
            chart.params().h_fd);
        Vec2 t{w.v, -w.u};
        const double n = chart.metric_at(pt).norm(t);
        if (!(n > 0.0) || !std::isfinite(n))
            throw NumericError("submersion degenerate at (u,v)=(" + format_double(pt.u) + ", " +
                               format_double(pt.v) + ")");
        return t / n;
    }

    // -----------------------------------------------------------------------
    // Leaf tracing: RK4 on the unit tangent field at fixed arc-length step,
    // with a Newton projection back onto the level set after every step.
    // Stops when the curve closes (back within step/2 of the seed, tangent
    // aligned) or exits through a non-periodic edge; open traces are
    // continued backwards from the seed and stitched.
    // -----------------------------------------------------------------------

    Curve trace_leaf(Point seed, double step = 0.0) const {
        const MetricChart& chart = state_->chart;
        if (step <= 0.0) step = state_->arc_step;
        seed = chart.wrap(seed);
        if (!chart.contains(seed, 1e-9)) throw NumericError("trace_leaf: seed outside chart");
        // The trace runs on raw coordinates; the level is the raw phi value at
        // the seed, so angle-like submersions stay continuous along the leaf.
        const double level = state_->phi(seed);
        (void)jacobian(seed);  // validates the submersion condition at the seed

        Curve fwd = trace_one_direction(seed, level, step, +1.0);
        if (fwd.closed) {
            fwd.level = level;
            assign_arc_weights(chart, fwd);
            return fwd;
        }
        Curve bwd = trace_one_direction(seed, level, step, -1.0);
        Curve out;
        out.level = level;
        out.closed = false;
        out.samples.reserve(bwd.samples.size() + fwd.samples.size());
        out.tangents.reserve(bwd.samples.size() + fwd.samples.size());
        for (std::size_t i = bwd.samples.size(); i-- > 1;) {
            out.samples.push_back(bwd.samples[i]);
            out.tangents.push_back(bwd.tangents[i]);
        }
        for (std::size_t i = 0; i < fwd.samples.size(); ++i) {
            out.samples.push_back(fwd.samples[i]);
            out.tangents.push_back(fwd.tangents[i]);
        }
        assign_arc_weights(chart, out);
        return out;
    }

    // -----------------------------------------------------------------------
    // Exact leafwise integral ("hat"): integrate f over the leaf through pt.
    // Memoized by quantized level value.
    // -----------------------------------------------------------------------

    double leaf_integral(const ScalarField& f, const Point& pt) const {
        const Interval range = state_->probe.level_range;
        const double quantum =
            std::max(range.length(), 1e-300) * state_->chart.params().level_quantum_frac;
        const double level = phi_at(pt);
        const long long q = static_cast<long long>(std::llround((level - range.lo) / quantum));
        const MemoKey key{f.key(), q};
        {
            std::lock_guard<std::mutex> lock(state_->memo_mutex);
            auto it = state_->hat_memo.find(key);
            if (it != state_->hat_memo.end()) return it->second;
        }
        const Curve leaf = trace_leaf(pt);
        const double value = integrate_curve(leaf, f);
        {
            std::lock_guard<std::mutex> lock(state_->memo_mutex);
            state_->hat_memo.emplace(key, value);
            state_->memo_pins.push_back(f);  // keep the key's address alive
        }
        return value;
    }

    // -----------------------------------------------------------------------
    // Leaf integral of J^alpha and its derivative along the level coordinate,
    // from one exact trace of the leaf through the point. The level flow
    // W = grad(phi) / |grad(phi)|^2 advances levels at unit rate, so the
    // first-variation formula for line integrals gives
    //     dD/dlevel = int_L [ g(grad(J^alpha), W) + J^alpha div_F W ] dmu.
    // This is the accuracy-critical ingredient of grad(log f0): splines over
    // tabulated levels are not reparametrization-invariant enough for the
    // pointwise residual diagnostics.
    // -----------------------------------------------------------------------

    struct DenominatorRates {
        double value = 0.0;  // D(level)
        double rate = 0.0;   // dD/dlevel
    };

    DenominatorRates denominator_rates(double alpha, const Point& pt) const {
        const MetricChart& chart = state_->chart;
        const Interval range = state_->probe.level_range;
        const double quantum =
            std::max(range.length(), 1e-300) * chart.params().level_quantum_frac;
        const double level = phi_at(pt);
        long long akey = 0;
        static_assert(sizeof(akey) == sizeof(alpha));
        std::memcpy(&akey, &alpha, sizeof(alpha));
        const std::pair<long long, long long> key{
            akey, static_cast<long long>(std::llround((level - range.lo) / quantum))};
        {
            std::lock_guard<std::mutex> lock(state_->memo_mutex);
            auto it = state_->rate_memo.find(key);
            if (it != state_->rate_memo.end()) return it->second;
        }

        const Curve leaf = trace_leaf(pt);
        auto j_pow = [&](const Point& q) { return std::pow(jacobian(q), alpha); };
        auto level_flow = [&](const Point& q) {
            const double anchor = state_->phi(q);
            const Vec2 grad = fd_gradient(
                chart, [&](const Point& r) { return phi_branch(r, anchor); }, q,
                chart.params().h_fd);
            const double g2 = chart.metric_at(q).dot(grad, grad);
            if (!(g2 > chart.params().sing_tol * chart.params().sing_tol))
                throw NumericError("level flow degenerate along leaf");
            return grad / g2;
        };

        DenominatorRates out;
        for (std::size_t i = 0; i < leaf.samples.size(); ++i) {
            const Point& q = leaf.samples[i];
            const double w = leaf.arc_weights[i];
            const double jp = j_pow(q);
            out.value += w * jp;
            const Vec2 grad_jp = fd_gradient(chart, j_pow, q, chart.params().h_fd);
            const Vec2 flow_q = level_flow(q);
            const Vec2 dflow = covariant_derivative(chart, level_flow, leaf.tangents[i], q);
            const Metric2 g = chart.metric_at(q);
            const double stretch = g.dot(dflow, leaf.tangents[i]);
            out.rate += w * (g.dot(grad_jp, flow_q) + jp * stretch);
        }
        std::lock_guard<std::mutex> lock(state_->memo_mutex);
        return state_->rate_memo.emplace(key, out).first->second;
    }

    // -----------------------------------------------------------------------
    // Level table and hat splines (shared snapshots)
    // -----------------------------------------------------------------------

    int default_table_levels() const {
        const int configured = state_->chart.params().table_levels;
        return configured > 0 ? configured : 129;
    }

    /// Table resolution matched to a quadrature grid (two levels per cell).
    int levels_for_grid(const GridSpec& grid) const {
        const int configured = state_->chart.params().table_levels;
        if (configured > 0) return configured;
        return std::clamp(2 * std::max(grid.nu, grid.nv) + 1, 65, 513);
    }

    std::shared_ptr<const LeafTable> table(int min_levels = 0) const {
        if (min_levels <= 0) min_levels = default_table_levels();
        {
            std::lock_guard<std::mutex> lock(state_->table_mutex);
            if (state_->table && static_cast<int>(state_->table->levels.size()) >= min_levels)
                return state_->table;
        }
        build_table(min_levels);
        std::lock_guard<std::mutex> lock(state_->table_mutex);
        return state_->table;
    }

    /// Spline of the leaf integral of a point function as a function of the
    /// level. `key` names the integrand for caching.
    template <typename F>
    std::shared_ptr<const LevelSpline> hat_spline_keyed(const std::string& key, F&& f,
                                                        int min_levels = 0) const {
        auto tab = table(min_levels);
        const std::string full_key = std::to_string(tab->levels.size()) + "|" + key;
        {
            std::lock_guard<std::mutex> lock(state_->table_mutex);
            auto it = state_->hat_splines.find(full_key);
            if (it != state_->hat_splines.end()) return it->second;
        }
        const std::size_t n = tab->curves.size();
        std::vector<double> vals(n, 0.0);
        parallel_for(n, [&](std::size_t i) { vals[i] = integrate_curve_fn(tab->curves[i], f); });
        auto spline =
            std::make_shared<const LevelSpline>(make_natural_spline(tab->levels, std::move(vals)));
        std::lock_guard<std::mutex> lock(state_->table_mutex);
        return state_->hat_splines.emplace(full_key, std::move(spline)).first->second;
    }

    std::shared_ptr<const LevelSpline> hat_spline(const ScalarField& f,
                                                  int min_levels = 0) const {
        std::ostringstream key;
        key << "field:" << f.key();
        {
            std::lock_guard<std::mutex> lock(state_->memo_mutex);
            state_->memo_pins.push_back(f);
        }
        return hat_spline_keyed(
            key.str(), [f](const Point& p) { return f(p); }, min_levels);
    }

    /// Leaf length as a spline over the level ("hat of 1").
    std::shared_ptr<const LevelSpline> length_spline(int min_levels = 0) const {
        return hat_spline_keyed(
            "const:1", [](const Point&) { return 1.0; }, min_levels);
    }

    Point find_seed(double level) const;

    Curve find_leaf_for_level(double level, double step = 0.0) const {
        return trace_leaf(find_seed(level), step);
    }

    LeafFamily sample_leaf_family(int n_leaves, double step = 0.0) const {
        if (n_leaves < 1) throw ConfigError("leaf family needs at least one leaf");
        const Interval range = state_->probe.level_range;
        LeafFamily fam;
        fam.levels.resize(static_cast<std::size_t>(n_leaves));
        fam.leaf_weights.assign(static_cast<std::size_t>(n_leaves), range.length() / n_leaves);
        fam.leaves.resize(static_cast<std::size_t>(n_leaves));
        for (int j = 0; j < n_leaves; ++j)
            fam.levels[static_cast<std::size_t>(j)] =
                range.lo + (j + 0.5) * range.length() / n_leaves;
        parallel_for(static_cast<std::size_t>(n_leaves),
                     [&](std::size_t j) { fam.leaves[j] = find_leaf_for_level(fam.levels[j], step); });
        return fam;
    }

private:
    struct MemoKey {
        const void* field;
        long long qlevel;
        bool operator<(const MemoKey& o) const {
            return field != o.field ? field < o.field : qlevel < o.qlevel;
        }
    };

    struct State {
        MetricChart chart;
        ScalarField phi;
        double arc_step = 0.0;
        double max_leaf_length = 0.0;
        FoliationProbe probe;

        mutable std::mutex memo_mutex;
        mutable std::map<MemoKey, double> hat_memo;
        mutable std::map<std::pair<long long, long long>, DenominatorRates> rate_memo;
        mutable std::vector<ScalarField> memo_pins;

        mutable std::mutex table_mutex;
        mutable std::shared_ptr<const LeafTable> table;
        mutable std::map<std::string, std::shared_ptr<const LevelSpline>> hat_splines;
    };

    void probe_stats() {
        State& st = *state_;
        const int n = st.chart.params().probe_n;
        double lvl_lo = 0.0, lvl_hi = 0.0, j_lo = 0.0, j_hi = 0.0;
        bool first = true, jfirst = true;
        for (double u : linspace(st.chart.u_range().lo, st.chart.u_range().hi, n)) {
            for (double v : linspace(st.chart.v_range().lo, st.chart.v_range().hi, n)) {
                const Point p = st.chart.wrap({u, v});
                const double value = st.phi(p);
                if (first) {
                    lvl_lo = lvl_hi = value;
                    first = false;
                } else {
                    lvl_lo = std::min(lvl_lo, value);
                    lvl_hi = std::max(lvl_hi, value);
                }
                try {
                    const double j = jacobian(p);
                    if (jfirst) {
                        j_lo = j_hi = j;
                        jfirst = false;
                    } else {
                        j_lo = std::min(j_lo, j);
                        j_hi = std::max(j_hi, j);
                    }
                } catch (const NumericError&) {
                    if (!st.probe.degenerate) {
                        st.probe.degenerate = true;
                        st.probe.degenerate_at = p;
                    }
                }
            }
        }
        st.probe.level_range = {lvl_lo, lvl_hi};
        st.probe.jphi_min = j_lo;
        st.probe.jphi_max = j_hi;
    }

    void build_table(int n_levels) const {
        State& st = *state_;
        if (st.probe.degenerate)
            throw NumericError("cannot build leaf table: submersion degenerate at (u,v)=(" +
                               format_double(st.probe.degenerate_at.u) + ", " +
                               format_double(st.probe.degenerate_at.v) + ")");
        const Interval range = st.probe.level_range;
        if (!(range.length() > 0.0))
            throw NumericError("submersion attains a single value on the probe grid");
        const double nudge = 1e-9 * range.length();
        auto tab = std::make_shared<LeafTable>();
        tab->levels = linspace(range.lo + nudge, range.hi - nudge, n_levels);
        tab->curves.resize(tab->levels.size());
        parallel_for(tab->levels.size(),
                     [&](std::size_t i) { tab->curves[i] = find_leaf_for_level(tab->levels[i]); });
        std::lock_guard<std::mutex> lock(st.table_mutex);
        if (st.table && static_cast<int>(st.table->levels.size()) >= n_levels) return;
        st.table = std::move(tab);
    }

    // Raw-coordinate trace in one direction. Periodic coordinates are left
    // unwrapped while stepping (wrapping mid-trace would cut angle-like
    // submersions at the seam); stored samples are wrapped at the end.
    Curve trace_one_direction(const Point& seed, double level, double step, double sign) const {
        const MetricChart& chart = state_->chart;
        const double drift_tol = chart.params().trace_tol;
        auto field = [&](const Point& q) { return unit_tangent(q) * sign; };
        auto rk4 = [&](const Point& p, double h) {
            const Vec2 k1 = field(p);
            const Vec2 k2 = field(p + k1 * (0.5 * h));
            const Vec2 k3 = field(p + k2 * (0.5 * h));
            const Vec2 k4 = field(p + k3 * h);
            return p + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
        };
        // Newton projection back onto the level set, run only when the
        // measured drift warrants it.
        auto step_fn = [&](const Point& p, double h) {
            Point q = rk4(p, h);
            double err = level_diff(state_->phi(q), level);
            for (int it = 0; it < 8 && std::abs(err) > 0.05 * drift_tol; ++it) {
                const Vec2 grad = fd_gradient(
                    chart, [&](const Point& r) { return phi_branch(r, level); }, q,
                    chart.params().h_fd);
                const double g2 = chart.metric_at(q).dot(grad, grad);
                if (!(g2 > 1e-300)) break;
                q += grad * (-err / g2);
                err = level_diff(state_->phi(q), level);
            }
            if (std::abs(err) > drift_tol)
                throw NumericError("leaf trace drifted off its level (drift " +
                                   format_double(std::abs(err)) + ")");
            return q;
        };
        auto push = [&](Curve& c, const Point& raw) {
            c.samples.push_back(chart.wrap(raw));
            c.tangents.push_back(unit_tangent(raw));
        };

        // FD noise in the tangent can push a boundary-edge leaf a few ulps
        // outside the box; snap such micro-excursions back onto the edge
        // instead of terminating the trace.
        const double snap_u = 1e-9 * chart.u_range().length();
        const double snap_v = 1e-9 * chart.v_range().length();
        auto snap = [&](Point p) {
            if (!chart.periodic_u()) {
                if (p.u < chart.u_range().lo && p.u > chart.u_range().lo - snap_u)
                    p.u = chart.u_range().lo;
                if (p.u > chart.u_range().hi && p.u < chart.u_range().hi + snap_u)
                    p.u = chart.u_range().hi;
            }
            if (!chart.periodic_v()) {
                if (p.v < chart.v_range().lo && p.v > chart.v_range().lo - snap_v)
                    p.v = chart.v_range().lo;
                if (p.v > chart.v_range().hi && p.v < chart.v_range().hi + snap_v)
                    p.v = chart.v_range().hi;
            }
            return p;
        };

        Curve out;
        push(out, seed);
        const Vec2 seed_tangent = out.tangents.front();
        Point cur = seed;
        double travelled = 0.0;
        const std::size_t max_steps =
            static_cast<std::size_t>(state_->max_leaf_length / step) + 8;
        for (std::size_t i = 0; i < max_steps; ++i) {
            const Point next = snap(step_fn(cur, step));
            if (!chart.contains(next, 0.0)) {
                // land exactly on the non-periodic boundary
                double lo = 0.0, hi = step;
                for (int it = 0; it < 60 && hi - lo > 1e-13 * step; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (chart.contains(step_fn(cur, mid), 0.0))
                        lo = mid;
                    else
                        hi = mid;
                }
                Point edge = step_fn(cur, lo);
                edge.u = chart.periodic_u() ? edge.u : chart.u_range().clamp(edge.u);
                edge.v = chart.periodic_v() ? edge.v : chart.v_range().clamp(edge.v);
                if (chart.metric_distance(edge, cur) > 1e-14) push(out, edge);
                return out;
            }
            if (i >= 3) {
                const double d = chart.metric_distance(next, seed);
                if (d < 0.5 * step &&
                    chart.metric_at(seed).dot(unit_tangent(next), seed_tangent) > 0.0) {
                    out.closed = true;
                    return out;
                }
            }
            push(out, next);
            cur = next;
            travelled += step;
            if (travelled > state_->max_leaf_length)
                throw NumericError("leaf too long (exceeds " +
                                   format_double(state_->max_leaf_length) + ")");
        }
        throw NumericError("leaf too long (step budget exhausted)");
    }

    std::shared_ptr<State> state_;
};

// ---------------------------------------------------------------------------
// Seed finding: scan probe lines in both coordinate directions for a sign
// change of phi - level, then bisect.
// ---------------------------------------------------------------------------

inline Point SubmersionFoliation::find_seed(double level) const {
    const MetricChart& ch = state_->chart;
    const int n = ch.params().probe_n;
    // A bracket across a periodic wrap seam (phi jumps there) bisects to the
    // discontinuity, not to the level; validate every candidate.
    const double accept = std::max(1e-9 * std::abs(state_->probe.level_range.length()), 1e-12);
    auto value = [&](const Point& p) { return level_diff(phi_at(p), level); };
    auto good = [&](const Point& p) { return std::abs(value(p)) <= accept; };
    auto bisect = [&](Point a, Point b) {
        double fa = value(a);
        for (int it = 0; it < 200; ++it) {
            const Point mid{0.5 * (a.u + b.u), 0.5 * (a.v + b.v)};
            const double fm = value(mid);
            if (fm == 0.0 || (std::abs(mid.u - a.u) < 1e-15 && std::abs(mid.v - a.v) < 1e-15))
                return mid;
            if ((fa < 0.0) != (fm < 0.0)) {
                b = mid;
            } else {
                a = mid;
                fa = fm;
            }
        }
        return Point{0.5 * (a.u + b.u), 0.5 * (a.v + b.v)};
    };

    auto scan = [&](bool along_u) -> std::optional<Point> {
        const auto lines = along_u ? linspace(ch.v_range().lo, ch.v_range().hi, 17)
                                   : linspace(ch.u_range().lo, ch.u_range().hi, 17);
        const auto ts = along_u ? linspace(ch.u_range().lo, ch.u_range().hi, n)
                                : linspace(ch.v_range().lo, ch.v_range().hi, n);
        for (double line : lines) {
            auto mk = [&](double t) {
                return along_u ? Point{t, line} : Point{line, t};
            };
            Point prev = mk(ts[0]);
            double fprev = value(prev);
            if (good(prev)) return prev;
            for (std::size_t i = 1; i < ts.size(); ++i) {
                const Point p = mk(ts[i]);
                const double f = value(p);
                if (good(p)) return p;
                if ((fprev < 0.0) != (f < 0.0)) {
                    const Point cand = bisect(prev, p);
                    if (good(cand)) return cand;
                }
                prev = p;
                fprev = f;
            }
        }
        return std::nullopt;
    };

    if (auto p = scan(true)) return *p;
    if (auto p = scan(false)) return *p;
    throw NumericError("level " + format_double(level) + " not attained on the chart");
}

// ---------------------------------------------------------------------------
// Extremal function and modulus
// ---------------------------------------------------------------------------

struct ExtremalFunction {
    ScalarField f0;
    double p = 2.0;
    enum class Source { closed_form, solver } source = Source::closed_form;
};

namespace detail {

inline std::shared_ptr<const LevelSpline> jphi_hat_spline(const SubmersionFoliation& fol,
                                                          double alpha, int min_levels) {
    return fol.hat_spline_keyed(
        "jphi_pow:" + format_double(alpha),
        [fol, alpha](const Point& p) { return std::pow(fol.jacobian(p), alpha); }, min_levels);
}

}  // namespace detail

/// Closed-form extremal function f0 = J^(1/(p-1)) / hat(J^(1/(p-1))).
inline ExtremalFunction extremal_closed_form(const SubmersionFoliation& fol, double p,
                                             int table_levels = 0) {
    if (!(p > 1.0)) throw ConfigError("exponent p must be > 1");
    const FoliationProbe& probe = fol.probe();
    if (probe.degenerate)
        throw NumericError("submersion degenerate at (u,v)=(" +
                           format_double(probe.degenerate_at.u) + ", " +
                           format_double(probe.degenerate_at.v) + ")");
    if (!std::isfinite(probe.jphi_max))
        throw NumericError("submersion Jacobian unbounded on chart");
    const double alpha = 1.0 / (p - 1.0);
    auto denom = detail::jphi_hat_spline(fol, alpha, table_levels);

    ExtremalFunction out;
    out.p = p;
    out.source = ExtremalFunction::Source::closed_form;
    out.f0 = ScalarField::function(
        [fol, alpha, denom](double u, double v) {
            const Point pt{u, v};
            const double num = std::pow(fol.jacobian(pt), alpha);
            const double den = denom->eval(fol.phi_at(pt));
            if (!(den > 1e-14))
                throw NumericError("extremal function: vanishing leaf integral at level " +
                                   format_double(fol.phi_at(pt)));
            const double value = num / den;
            if (!(value > 0.0) || !std::isfinite(value))
                throw NumericError("extremal function evaluation failed");
            return value;
        },
        "closed-form extremal function");
    return out;
}

/// Gradient of log f0 without differencing through the level table:
///   grad(log f0) = alpha grad(log J) - (D'/D) grad(phi),  alpha = 1/(p-1),
/// with D and D' from one exact leaf trace. Exactly invariant under monotone
/// relabelings of the submersion (the relabeling terms cancel).
inline Vec2 extremal_log_gradient(const SubmersionFoliation& fol, double p, const Point& pt) {
    if (!(p > 1.0)) throw ConfigError("exponent p must be > 1");
    const double alpha = 1.0 / (p - 1.0);
    const MetricChart& chart = fol.chart();
    const SubmersionFoliation::DenominatorRates rates = fol.denominator_rates(alpha, pt);
    if (!(rates.value > 1e-14))
        throw NumericError("extremal function: vanishing leaf integral at level " +
                           format_double(fol.phi_at(pt)));
    const Vec2 grad_log_j = fd_gradient(
        chart, [&](const Point& q) { return std::log(fol.jacobian(q)); }, pt,
        chart.params().h_fd);
    const double anchor = fol.phi()(pt);
    const Vec2 grad_phi = fd_gradient(
        chart, [&](const Point& q) { return fol.phi_branch(q, anchor); }, pt,
        chart.params().h_fd);
    return grad_log_j * alpha - grad_phi * (rates.rate / rates.value);
}

/// mod_p of the foliation via the closed form: ||f0||_p.
inline double modulus_closed_form(const SubmersionFoliation& fol, double p, const GridSpec& grid) {
    const int levels = fol.levels_for_grid(grid);
    const ExtremalFunction ext = extremal_closed_form(fol, p, levels);
    const double integral = integrate_chart_fn(
        fol.chart(), [&](const Point& q) { return std::pow(ext.f0(q), p); }, grid);
    return std::pow(integral, 1.0 / p);
}

// ---------------------------------------------------------------------------
// Integral identity: for the closed-form f0 and a bounded test function phi,
//   int f0^(p-1) phi dmu  ==  int f0^p hat(phi) dmu.
// Returns the relative residual.
// ---------------------------------------------------------------------------

inline double integral_identity_residual(const SubmersionFoliation& fol, double p,
                                         const ScalarField& testfn, const GridSpec& grid) {
    const int levels = fol.levels_for_grid(grid);
    const ExtremalFunction ext = extremal_closed_form(fol, p, levels);
    auto hat = fol.hat_spline(testfn, levels);
    auto tab = fol.table(levels);

    // boundedness checks from the theorem hypotheses
    const int n = std::max(3, fol.chart().params().probe_n / 2);
    double sup = 0.0;
    for (double u : linspace(fol.chart().u_range().lo, fol.chart().u_range().hi, n))
        for (double v : linspace(fol.chart().v_range().lo, fol.chart().v_range().hi, n))
            sup = std::max(sup, std::abs(testfn(u, v)));
    if (!std::isfinite(sup)) throw NumericError("test function unbounded on chart");
    double sup_hat = 0.0;
    for (double lv : tab->levels) sup_hat = std::max(sup_hat, std::abs(hat->eval(lv)));
    if (!std::isfinite(sup_hat)) throw NumericError("leafwise integral of test function unbounded");

    const double lhs = integrate_chart_fn(
        fol.chart(),
        [&](const Point& q) { return std::pow(ext.f0(q), p - 1.0) * testfn(q.u, q.v); }, grid);
    const double rhs = integrate_chart_fn(
        fol.chart(),
        [&](const Point& q) { return std::pow(ext.f0(q), p) * hat->eval(fol.phi_at(q)); }, grid);
    // Both sides can vanish by symmetry (and so can every leaf integral of
    // the test function); normalize by the a-priori bounds of the two sides,
    // sup|phi| int f0^(p-1) and sup|hat phi| int f0^p, so symmetric-zero
    // cases report their absolute defect on the natural scale.
    const double mod_pow = integrate_chart_fn(
        fol.chart(), [&](const Point& q) { return std::pow(ext.f0(q), p); }, grid);
    const double mass_pm1 = integrate_chart_fn(
        fol.chart(), [&](const Point& q) { return std::pow(ext.f0(q), p - 1.0); }, grid);
    const double scale =
        std::max({std::abs(lhs), std::abs(rhs), sup * mass_pm1, sup_hat * mod_pow, 1e-30});
    return std::abs(lhs - rhs) / scale;
}

// ---------------------------------------------------------------------------
// Admissibility diagnostics: bounds on the Jacobian, finiteness of the leaf
// lengths and of the chart volume. Reports instead of throwing.
// ---------------------------------------------------------------------------

struct AdmissibilityReport {
    double jphi_min = 0.0;
    double jphi_max = 0.0;
    double hat1_max = 0.0;  // longest traced leaf
    double volume = 0.0;
    bool degenerate = false;
    Point degenerate_at;
    bool leaves_finite = false;
    std::string trace_error;
    bool pass = false;
};

inline AdmissibilityReport admissibility_diagnostics(const SubmersionFoliation& fol,
                                                     const GridSpec& grid) {
    AdmissibilityReport rep;
    const FoliationProbe& probe = fol.probe();
    rep.degenerate = probe.degenerate;
    rep.degenerate_at = probe.degenerate_at;
    rep.jphi_min = probe.jphi_min;
    rep.jphi_max = probe.jphi_max;
    rep.volume = integrate_chart_fn(
        fol.chart(), [](const Point&) { return 1.0; }, grid);
    if (!rep.degenerate) {
        try {
            auto len = fol.length_spline();
            double longest = 0.0;
            for (double lv : fol.table()->levels) longest = std::max(longest, len->eval(lv));
            rep.hat1_max = longest;
            rep.leaves_finite = true;
        } catch (const Error& e) {
            rep.leaves_finite = false;
            rep.trace_error = e.what();
        }
    }
    rep.pass = !rep.degenerate && rep.leaves_finite && std::isfinite(rep.volume) &&
               rep.jphi_min > fol.chart().params().sing_tol && std::isfinite(rep.jphi_max);
    return rep;
}

}  // namespace folmod
