#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "folmod/flow.hpp"
#include "oracles.hpp"

using namespace folmod;
constexpr double kPi = std::numbers::pi;
constexpr double kE = std::numbers::e;

namespace {

SubmersionFoliation annulus_circles() {
    return SubmersionFoliation(annulus_chart(1.0, kE), ScalarField::expression("u"));
}

VectorField gentle_bump() {
    return VectorField::expressions("0.6*bump(u-1.85, 0.2, 0.8)*(1+0.3*cos(v))",
                                    "0.25*sin(v)*bump(u-1.85, 0.2, 0.8)");
}

}  // namespace

TEST_CASE("flow basics: identity, rotation, inverse, composition") {
    auto chart = annulus_chart(1.0, kE);

    const Flow zero(chart, VectorField::zero());
    const Point p{1.7, 2.2};
    const Point q = zero.at(0.8, p);
    CHECK(q.u == p.u);
    CHECK(q.v == p.v);

    const Flow rot(chart, VectorField::expressions("0", "1"));
    const Point r = rot.at(kPi, {2.0, 0.5});
    CHECK(r.u == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(r.v == doctest::Approx(0.5 + kPi).epsilon(1e-8));
    // t = 0 is the identity exactly
    const Point r0 = rot.at(0.0, {2.0, 0.5});
    CHECK(r0.u == 2.0);
    CHECK(r0.v == 0.5);

    const Flow flow(chart, gentle_bump());
    oracles::Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const Point x = oracles::random_interior_point(rng, chart);
        // group property
        const Point a = flow.at(0.1, flow.at(0.2, x));
        const Point b = flow.at(0.3, x);
        CHECK(chart.metric_distance(a, b) < 1e-8);
        // inverse property
        const Point c = flow.at(-0.25, flow.at(0.25, x));
        CHECK(chart.metric_distance(c, x) < 1e-8);
    }
}

TEST_CASE("leafwise tangent stretch of a flow") {
    auto circles = annulus_circles();
    const Curve leaf = circles.trace_leaf({1.9, 0.3});
    auto chart = circles.chart();

    const Flow flow(chart, gentle_bump());
    const std::vector<double> j0 = leaf_jacobian(flow, 0.0, leaf);
    for (double j : j0) CHECK(j == doctest::Approx(1.0).epsilon(1e-9));

    // rotations are isometries of the polar metric: no stretch at any t
    const Flow rot(chart, VectorField::expressions("0", "1"));
    const std::vector<double> jr = leaf_jacobian(rot, 0.7, leaf);
    for (double j : jr) CHECK(j == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("tangent stretch rate equals the leafwise divergence") {
    auto circles = annulus_circles();
    auto chart = circles.chart();
    const VectorField X = gentle_bump();
    const Flow flow(chart, X);

    oracles::Rng rng(123);
    const Curve leaf_a = circles.trace_leaf({1.6, 0.0});
    const Curve leaf_b = circles.trace_leaf({2.2, 1.0});
    double sup = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Curve& leaf = trial % 2 ? leaf_a : leaf_b;
        const std::size_t i = static_cast<std::size_t>(rng.pick(static_cast<int>(leaf.samples.size())));
        const double rate = leaf_jacobian_rate(flow, leaf.samples[i], leaf.tangents[i]);
        const double divf = div_leafwise(chart, X, leaf.tangents[i], leaf.samples[i]);
        sup = std::max(sup, std::abs(rate - divf));
    }
    CHECK(sup < 1e-5);
}

TEST_CASE("variation vanishes for leaf-tangent and foliation-preserving fields") {
    auto circles = annulus_circles();
    const GridSpec grid{24, 24};
    const double h = 1e-3 * circles.chart().diameter();

    // tangent to the circles: X = chi * d/dv
    const VectorField tangent =
        VectorField::expressions("0", "0.3*(1+0.4*sin(v))*bump(u-1.8, 0.3, 0.7)");
    const double van = variation_analytic(circles, 2.0, tangent, grid);
    CHECK(std::abs(van) < 1e-5 * sup_norm_estimate(circles.chart(), tangent));
    const FdVariation tfd = variation_fd(circles, 2.0, tangent, h, grid);
    CHECK(std::abs(tfd.value) < 1e-5);

    // rotation field preserves each leaf setwise
    const VectorField rot = VectorField::expressions("0", "1");
    CHECK(std::abs(variation_analytic(circles, 2.0, rot, grid)) < 1e-5);

    // radial bump relabels the circle family: foliation-preserving
    const VectorField radial = VectorField::expressions("0.8*bump(u-1.85, 0.2, 0.8)", "0");
    const GridSpec fd_grid{32, 32};  // the fd drift needs the fields resolved
    const double va = variation_analytic(circles, 2.0, radial, fd_grid);
    const FdVariation fd = variation_fd(circles, 2.0, radial, h, fd_grid);
    CHECK(std::abs(va) < 1e-5);
    CHECK(std::abs(fd.value) < 1e-5);
    CHECK(fd.error_bar < 1e-4);

    // zero field: the finite difference is exactly zero
    const FdVariation zfd = variation_fd(circles, 2.0, VectorField::zero(), h, grid);
    CHECK(zfd.value == 0.0);
}

TEST_CASE("variation formula against the finite-difference oracle") {
    // non-critical foliation, so the variation is genuinely nonzero
    auto fol = SubmersionFoliation(
        annulus_chart(1.0, kE),
        ScalarField::expression("u + 0.35*sin(v)*(u-1)*(2.718281828459045-u)"));
    const double h = 1e-3 * fol.chart().diameter();
    const VariationReport rep = make_variation_report(fol, 2.0, gentle_bump(), h, {32, 32});
    CHECK(std::abs(rep.analytic) > 1e-4);  // actually nonzero
    const double gap = std::abs(rep.analytic - rep.finite_difference) /
                       std::max(std::abs(rep.finite_difference), 1e-8);
    CHECK(gap < 1e-2);
    CHECK(rep.fd_error_bar < 1e-4);
    CHECK(rep.stencil.size() == 6);
}

TEST_CASE("variation is linear in the field") {
    auto circles = annulus_circles();
    const GridSpec grid{24, 24};

    const VectorField zero = VectorField::zero();
    const VectorField a =
        VectorField::expressions("0.5*bump(u-1.4, 0.1, 0.35)", "0.2*sin(v)*bump(u-1.4, 0.1, 0.35)");
    CHECK(variation_linearity_check(circles, 2.0, a, zero, grid) < 1e-12);

    // disjoint supports: the integrand is literally additive
    const VectorField b =
        VectorField::expressions("-0.4*bump(u-2.3, 0.1, 0.3)", "0.3*cos(v)*bump(u-2.3, 0.1, 0.3)");
    CHECK(variation_linearity_check(circles, 2.0, a, b, grid) < 1e-8);

    // overlapping supports
    const VectorField c =
        VectorField::expressions("0.3*bump(u-1.6, 0.2, 0.6)", "0.1*bump(u-1.6, 0.2, 0.6)");
    CHECK(variation_linearity_check(circles, 2.0, a, c, grid) < 1e-6);
}

TEST_CASE("chain rule of the flowed extremal function") {
    // d/dt [f_t(phi_t(x))] = g(grad f_t, X) + (d f_t/dt), checked at t = 0
    // with every f_t available in closed form on the flowed foliation.
    auto circles = annulus_circles();
    auto chart = circles.chart();
    const VectorField X = gentle_bump();
    const double h = 1e-3 * chart.diameter();
    const Flow flow(chart, X, 2.0 * h);  // one RK4 step per stencil evaluation

    const ExtremalFunction base = extremal_closed_form(circles, 2.0, 65);
    ScalarField ft_fields[4];
    const double ts[4] = {-2 * h, -h, h, 2 * h};
    for (int k = 0; k < 4; ++k)
        ft_fields[k] = extremal_closed_form(flowed_foliation(circles, flow, ts[k]), 2.0, 65).f0;
    auto stencil4 = [&](const double vals[4]) {
        return (-vals[3] + 8.0 * vals[2] - 8.0 * vals[1] + vals[0]) / (12.0 * h);
    };

    oracles::Rng rng(5150);
    for (int trial = 0; trial < 3; ++trial) {
        const Point x = oracles::random_interior_point(rng, chart, 0.15);
        double alpha[4], fixed[4];
        for (int k = 0; k < 4; ++k) {
            alpha[k] = ft_fields[k](flow.at(ts[k], x));
            fixed[k] = ft_fields[k](x);
        }
        const double lhs = stencil4(alpha);
        const Vec2 grad_f0 = fd_gradient(
            chart, [&](const Point& r) { return base.f0(r); }, x,
            chart.params().h_grad_field);
        const double term1 = chart.metric_at(x).dot(grad_f0, X(x));
        const double term2 = stencil4(fixed);
        CHECK(std::abs(lhs - term1 - term2) < 1e-4 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("fields crossing the boundary are rejected") {
    auto horiz = SubmersionFoliation(rectangle_chart(2.0, 1.0), ScalarField::expression("v"));
    const VectorField crossing = VectorField::expressions("1", "0");  // exits at u = 0, 2
    CHECK_THROWS_WITH_AS(variation_analytic(horiz, 2.0, crossing, {16, 16}),
                         doctest::Contains("not compactly supported"), ConfigError);

    // the annulus rotation field is edge-tangent: allowed
    auto circles = annulus_circles();
    CHECK_NOTHROW(variation_analytic(circles, 2.0, VectorField::expressions("0", "1"), {16, 16}));

    CHECK_THROWS_AS(
        variation_fd(circles, 2.0, gentle_bump(), 0.0, {16, 16}), ConfigError);
}

TEST_CASE("vector fields with a support descriptor vanish outside it") {
    const BumpSupport support{{1.8, 3.0}, 0.2, 0.5};
    const VectorField X(ScalarField::expression("1+u"), ScalarField::expression("sin(v)"),
                        support);
    oracles::Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const double u = rng.uniform(1.0, kE);
        const double v = rng.uniform(0.0, 2 * kPi);
        const double d = std::hypot(u - 1.8, v - 3.0);
        const Vec2 val = X(u, v);
        if (d >= 0.5) {
            CHECK(val.u == 0.0);
            CHECK(val.v == 0.0);
        }
        if (d <= 0.2) {
            CHECK(val.u == doctest::Approx(1 + u));
        }
    }
}
