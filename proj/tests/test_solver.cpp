#include <cmath>
#include <numbers>

#include <doctest.h>

#include "balpot/errors.hpp"
#include "balpot/extension.hpp"
#include "balpot/measure.hpp"
#include "balpot/solver.hpp"

using namespace balpot;

namespace {

SolverOptions tight() {
    SolverOptions o;
    o.omega = 0.0;
    o.tol = 1e-13;
    return o;
}

ScalarField annulus_sigma(int n, double rho_factor, double L) {
    const BackgroundPotential q{0.5, {PointMass{{0.3, 0.0}, 1.0}}, 1.0};
    const TExtension ext = build_extension(q, rho_factor * min_radius(q));
    return rasterize(ext.sigma, Grid(n, L), {PointSplat::tsc});
}

}  // namespace

TEST_CASE("auto relaxation factor") {
    SolverOptions o;
    o.omega = 0.0;
    CHECK(resolve_omega(o, 68) == doctest::Approx(2.0 / (1.0 + std::sin(std::numbers::pi / 64.0))));
    o.omega = 1.5;
    CHECK(resolve_omega(o, 68) == 1.5);
}

TEST_CASE("laplacian of a quadratic") {
    const Grid g(16, 1.0);
    ScalarField u(g);
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) u(i, j) = std::norm(g.center(i, j));
    }
    const ScalarField lap = laplacian(u);
    CHECK(lap(5, 9) == doctest::Approx(4.0));
}

TEST_CASE("non-negative total mass is rejected") {
    const Grid g(16, 1.0);
    CHECK_THROWS_AS(solve_obstacle(ScalarField(g, 0.0)), MassNotNegative);
    CHECK_THROWS_AS(sandpile_oracle(ScalarField(g, 1.0)), MassNotNegative);
}

TEST_CASE("a purely negative sigma gives u = 0 and mu = -sigma") {
    const Grid g(64, 2.0);
    SignedMeasureSpec spec;
    spec.negative_atoms.push_back(UniformDisk{{}, 1.0, 1.0 / std::numbers::pi});
    const ScalarField sigma = rasterize(spec, g);
    const SolveResult r = solve_obstacle(sigma, tight());
    CHECK(r.u.max_abs() == 0.0);
    CHECK(max_abs_diff(r.mu, -1.0 * sigma) == 0.0);
    CHECK(r.boundary_value == 0.0);
}

TEST_CASE("a point mass on a uniform sea spreads into a disk of equal mass") {
    const Grid g(64, 1.0);
    SignedMeasureSpec spec;
    spec.positive_atoms.push_back(PointMass{{}, 0.3});
    spec.negative_atoms.push_back(UniformDisk{{}, 0.8, 1.0});
    const ScalarField sigma = rasterize(spec, g, {PointSplat::tsc});
    const SolveResult r = solve_obstacle(sigma, tight());
    // the vacated region, where mu < 1, has area ~ 0.3
    double vacated = 0.0;
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            if (std::abs(g.center(i, j)) < 0.7) vacated += (1.0 - r.mu(i, j)) * g.cell_area();
        }
    }
    CHECK(vacated == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(r.mu.integral() == doctest::Approx(-sigma.integral()).epsilon(1e-9));
    CHECK(r.residual < 1e-8);
}

TEST_CASE("compact odometer: no leak and zero boundary band") {
    const SolveResult r = solve_obstacle(annulus_sigma(64, 1.0, 2.0), tight());
    CHECK(r.boundary_value == 0.0);
    CHECK(r.profile_updates == 0);
    CHECK(boundary_leak(r.u) == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
    CHECK(r.boundary_band_max < 1e-12);
    CHECK(r.mu.integral() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("zero Dirichlet data leak mass when the odometer is not compact") {
    const ScalarField sigma = annulus_sigma(64, 1.5, 3.2);
    SolverOptions o = tight();
    o.boundary = BoundaryMode::zero;
    const SolveResult zero = solve_obstacle(sigma, o);
    CHECK(zero.mass_leak > 1e-3);
    CHECK(zero.mu.integral() > 1.0 + 1e-3);
    o.boundary = BoundaryMode::constant;
    const SolveResult constant = solve_obstacle(sigma, o);
    CHECK(std::abs(constant.mass_leak) <= o.mass_tol);
    CHECK(constant.mu.integral() == doctest::Approx(1.0).epsilon(1e-7));
    o.boundary = BoundaryMode::far_field;
    const SolveResult far = solve_obstacle(sigma, o);
    CHECK(std::abs(far.mass_leak) <= o.mass_tol);
    CHECK(far.boundary_band_max < constant.boundary_band_max);
    // u tends to 2 alpha R^2 log(R / rho) + alpha (rho^2 - R^2) at infinity
    const double R = std::sqrt(2.0), rho = 1.5 * R;
    CHECK(far.boundary_value == doctest::Approx(2.0 * 0.5 * 2.0 * std::log(R / rho) + 0.5 * (rho * rho - 2.0)).epsilon(1e-2));
}

TEST_CASE("projected SOR and the divisible sandpile agree") {
    SUBCASE("zero boundary") {
        const ScalarField sigma = annulus_sigma(64, 1.0, 2.0);
        const SolveResult r = solve_obstacle(sigma, tight());
        const ScalarField pile = sandpile_oracle(sigma);
        CHECK(max_abs_diff(pile, r.u) <= 1e-6 * r.u.max());
    }
    SUBCASE("far-field boundary") {
        const ScalarField sigma = annulus_sigma(64, 1.5, 3.2);
        const SolveResult r = solve_obstacle(sigma, tight());
        const ScalarField pile = sandpile_oracle(sigma, r.u);
        CHECK(max_abs_diff(pile, r.u) <= 1e-6 * r.u.max());
    }
}

TEST_CASE("odometer is monotone in sigma") {
    const ScalarField base = annulus_sigma(64, 1.0, 2.0);
    ScalarField more = base;
    SignedMeasureSpec extra;
    extra.positive_atoms.push_back(UniformDisk{{-0.4, 0.2}, 0.2, 1.0});
    more += rasterize(extra, base.grid());
    SolverOptions o = tight();
    o.boundary = BoundaryMode::zero;
    const SolveResult a = solve_obstacle(base, o);
    const SolveResult b = solve_obstacle(more, o);
    double worst = 0.0;
    for (std::size_t k = 0; k < a.u.values().size(); ++k) {
        worst = std::min(worst, b.u.values()[k] - a.u.values()[k]);
    }
    CHECK(worst >= -1e-10);
}

TEST_CASE("odometer commutes with whole-cell translations") {
    const Grid g(64, 2.0);
    auto sigma_at = [&](Complex shift) {
        SignedMeasureSpec spec;
        spec.positive_atoms.push_back(UniformDisk{shift + Complex{0.1, 0.0}, 0.25, 2.0});
        spec.negative_atoms.push_back(UniformDisk{shift, 0.8, 1.0});
        return rasterize(spec, g);
    };
    const ScalarField a = sigma_at({});
    const ScalarField b = sigma_at({3.0 * g.h(), -2.0 * g.h()});
    const SolveResult ra = solve_obstacle(a, tight());
    const SolveResult rb = solve_obstacle(b, tight());
    double worst = 0.0;
    for (int j = 10; j < 54; ++j) {
        for (int i = 10; i < 54; ++i) worst = std::max(worst, std::abs(ra.u(i, j) - rb.u(i + 3, j - 2)));
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("recovered measure clamps round-off and rejects real negatives") {
    const Grid g(16, 1.0);
    ScalarField sigma(g, 0.0);
    ScalarField u(g, 0.0);
    u(8, 8) = 1e-3;  // a lone bump has -Lap u / 2pi > 0 at the centre, < 0 around it
    CHECK_THROWS_AS(recover_measure(sigma, u, 1e-12), NegativeDensity);
    CHECK_NOTHROW(recover_measure(sigma, u, 1.0));
    CHECK(complementarity_residual(sigma, ScalarField(g)) == 0.0);
}

TEST_CASE("balayage under a ceiling keeps mass and respects the ceiling") {
    const Grid g(64, 1.0);
    SignedMeasureSpec point;
    point.positive_atoms.push_back(PointMass{{}, 0.2});
    SignedMeasureSpec ceiling;
    ceiling.positive_atoms.push_back(UniformDisk{{}, 0.8, 1.0});
    const ScalarField mu = rasterize(point, g, {PointSplat::tsc});
    const ScalarField lambda = rasterize(ceiling, g);
    const ScalarField bal = bal_general(mu, lambda, tight());
    CHECK(bal.integral() == doctest::Approx(0.2).epsilon(1e-8));
    CHECK(bal.max() <= 1.0 + 1e-8);
    CHECK(bal.min() >= -1e-8);
}

TEST_CASE("sweep limit raises NotConverged") {
    SolverOptions o = tight();
    o.max_iter = 3;
    CHECK_THROWS_AS(solve_obstacle(annulus_sigma(64, 1.0, 2.0), o), NotConverged);
}

TEST_CASE("band checks") {
    const Grid g(16, 1.0);
    ScalarField u(g, 0.0);
    u(2, 8) = 0.5;
    u(8, 8) = 9.0;
    CHECK(boundary_band_check(u, 2) == 0.5);
    CHECK(boundary_band_check(u, ScalarField(g, 0.5), 2) == 0.5);
    CHECK_THROWS(boundary_band_check(u, 1));
}
