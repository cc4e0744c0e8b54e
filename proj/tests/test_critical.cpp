#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "folmod/critical.hpp"
#include "folmod/flow.hpp"
#include "oracles.hpp"

using namespace folmod;
constexpr double kPi = std::numbers::pi;
constexpr double kE = std::numbers::e;

namespace {
SubmersionFoliation annulus_circles() {
    return SubmersionFoliation(annulus_chart(1.0, kE), ScalarField::expression("u"));
}
SubmersionFoliation annulus_radial() {
    return SubmersionFoliation(annulus_chart(1.0, kE), ScalarField::expression("v"));
}
SubmersionFoliation rect_horizontal() {
    return SubmersionFoliation(rectangle_chart(2.0, 1.0), ScalarField::expression("v"));
}
SubmersionFoliation rect_vertical() {
    return SubmersionFoliation(rectangle_chart(2.0, 1.0), ScalarField::expression("u"));
}
}  // namespace

TEST_CASE("tangent-gradient identity on the golden foliations") {
    // constant extremal function and flat leaves: everything vanishes
    CHECK(tangent_gradient_residual(rect_horizontal(), 2.0, {32, 32}) < 1e-8);
    // f0 constant on circles, radial lines are geodesics
    CHECK(tangent_gradient_residual(annulus_circles(), 2.0, {32, 32}) < 1e-6);
    // f0 = 1/r with radial leaves: both sides equal -(1/r) d/du
    CHECK(tangent_gradient_residual(annulus_radial(), 2.0, {32, 32}) < 1e-4);
}

TEST_CASE("criticality residuals: golden foliations are critical") {
    CHECK(criticality_residual(rect_horizontal(), 2.0, {32, 32}) < 1e-8);
    CHECK(criticality_residual(rect_horizontal(), 3.0, {32, 32}) < 1e-8);
    CHECK(criticality_residual(annulus_circles(), 2.0, {32, 32}) < 1e-4);
    CHECK(criticality_residual(annulus_circles(), 3.0, {32, 32}) < 1e-4);
    CHECK(criticality_residual(annulus_radial(), 2.0, {32, 32}) < 1e-4);
}

TEST_CASE("perturbed annulus is detected as non-critical") {
    auto pert = SubmersionFoliation(annulus_chart(1.0, kE),
                                    ScalarField::expression("u + 0.3*u*sin(v)"));
    const double res = criticality_residual(pert, 2.0, {32, 32});
    CHECK(res >= 1e-2);
}

TEST_CASE("criticality residual is invariant under monotone relabeling") {
    // psi(s) = s^3 + s relabels the levels but fixes the foliation, hence f0
    const GridSpec grid{32, 32};
    const double base = criticality_residual(annulus_circles(), 2.0, grid);
    auto relabeled =
        SubmersionFoliation(annulus_chart(1.0, kE), ScalarField::expression("u^3 + u"));
    const double re = criticality_residual(relabeled, 2.0, grid);
    CHECK(std::abs(base - re) < 1e-6);
}

TEST_CASE("orthogonal pair construction validates inputs") {
    CHECK_THROWS_WITH_AS(make_orthogonal_pair(annulus_circles(), 2.0, annulus_circles()),
                         doctest::Contains("not orthogonal"), ConfigError);
    CHECK_THROWS_AS(make_orthogonal_pair(annulus_circles(), 1.0, annulus_radial()), ConfigError);
    const OrthogonalPair pair = make_orthogonal_pair(annulus_circles(), 3.0, annulus_radial());
    CHECK(pair.q == doctest::Approx(1.5));
    CHECK(1.0 / pair.p + 1.0 / pair.q == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("orthogonal pair product law on the golden pairs") {
    const GridSpec grid{64, 64};
    {
        const OrthogonalPair pair = make_orthogonal_pair(annulus_circles(), 2.0, annulus_radial());
        CHECK(pair_product_residual(pair, grid) < 1e-4);
        CHECK(pair_product_value(pair, grid) == doctest::Approx(1.0).epsilon(5e-4));
        // Hoelder chain holds with equality for the critical pair
        const double holder = pair_holder_integral(pair, grid);
        const double product = pair_product_value(pair, grid);
        CHECK(holder <= product + 5e-4);
        CHECK(std::abs(holder - product) < 5e-4);
    }
    {
        const OrthogonalPair pair = make_orthogonal_pair(rect_horizontal(), 2.0, rect_vertical());
        CHECK(pair_product_residual(pair, grid) < 1e-8);
        CHECK(pair_product_value(pair, grid) == doctest::Approx(1.0).epsilon(1e-6));
        const double holder = pair_holder_integral(pair, grid);
        CHECK(holder <= pair_product_value(pair, grid) + 5e-4);
    }
}

TEST_CASE("orthogonal pair product law at p = 3") {
    const GridSpec grid{64, 64};
    const OrthogonalPair annulus3 = make_orthogonal_pair(annulus_circles(), 3.0, annulus_radial());
    CHECK(pair_product_residual(annulus3, grid) < 1e-3);
    const OrthogonalPair rect3 = make_orthogonal_pair(rect_horizontal(), 3.0, rect_vertical());
    CHECK(pair_product_residual(rect3, grid) < 1e-3);
    // Hoelder inequality holds regardless of exponent
    CHECK(pair_holder_integral(annulus3, grid) <= pair_product_value(annulus3, grid) + 5e-4);
}

TEST_CASE("criticality of both members tracks the pair residual") {
    const GridSpec grid{32, 32};
    // golden pair: both members critical, product law tight
    const double crit_f = criticality_residual(annulus_circles(), 2.0, grid);
    const double crit_g = criticality_residual(annulus_radial(), 2.0, grid);
    const OrthogonalPair golden = make_orthogonal_pair(annulus_circles(), 2.0, annulus_radial());
    const double pair_res = pair_product_residual(golden, grid);
    CHECK(crit_f < 1e-4);
    CHECK(crit_g < 1e-4);
    CHECK(pair_res < 1e-4);

    // perturbed non-example: non-critical member, product law violated too
    auto pert = SubmersionFoliation(
        annulus_chart(1.0, kE),
        ScalarField::expression("u + 0.35*sin(v)*(u-1)*(2.718281828459045-u)"));
    CHECK(criticality_residual(pert, 2.0, grid) > 1e-2);
    const OrthogonalPair pert_pair = make_orthogonal_pair_auto(pert, 2.0, {48, 48});
    CHECK(pair_product_residual(pert_pair, grid) > 1e-2);
}

TEST_CASE("auto-constructed orthogonal foliation (grid first integral)") {
    const OrthogonalPair pair = make_orthogonal_pair_auto(annulus_circles(), 2.0, {64, 64});
    CHECK(pair.auto_constructed);
    // grid-resolution accuracy only: the product is near 1 at percent level
    CHECK(std::abs(pair_product_value(pair, {48, 48}) - 1.0) < 0.1);
    // its tangent is orthogonal to the base tangent away from the label seam
    auto chart = annulus_circles().chart();
    auto base = annulus_circles();
    int checked = 0;
    for (double u : linspace(1.2, 2.5, 7)) {
        for (double v : linspace(0.5, 5.5, 7)) {
            const Point pt{u, v};
            const double dot =
                chart.metric_at(pt).dot(base.unit_tangent(pt), pair.foliation_q.unit_tangent(pt));
            CHECK(std::abs(dot) < 0.05);
            ++checked;
        }
    }
    CHECK(checked == 49);
}

TEST_CASE("critical foliations have vanishing variation for random bump fields") {
    auto circles = annulus_circles();
    const GridSpec grid{24, 24};
    oracles::Rng rng(777);
    for (int trial = 0; trial < 5; ++trial) {
        const double cu = rng.uniform(1.5, 2.2);
        const double cv = rng.uniform(1.0, 5.0);
        const double amp1 = rng.uniform(-0.6, 0.6);
        const double amp2 = rng.uniform(-0.4, 0.4);
        const BumpSupport support{{cu, cv}, 0.12, 0.42};
        const VectorField X(ScalarField::constant(amp1), ScalarField::constant(amp2), support);
        const double v = variation_analytic(circles, 2.0, X, grid);
        const double sup = sup_norm_estimate(circles.chart(), X);
        CHECK(std::abs(v) < 1e-3 * std::max(sup, 1e-6));
    }
}
