#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "balpot/errors.hpp"
#include "balpot/extension.hpp"
#include "balpot/measure.hpp"
#include "balpot/solver.hpp"
#include "balpot/verifier.hpp"

using namespace balpot;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!out.pass) ++failures;
    std::printf("[%s] criterion %d: %s | %s | %.1fs\n", out.pass ? "PASS" : "FAIL", id, name,
                out.detail.c_str(), secs);
    std::fflush(stdout);
}

SolverOptions solver_options() {
    SolverOptions o;
    o.omega = 0.0;
    o.tol = 1e-13;
    return o;
}

struct Case {
    BackgroundPotential q;
    double rho = 0.0;
};

struct Solved {
    ScalarField sigma;
    SolveResult result;
};

double half_width(const Case& c) {
    double r = c.rho;
    for (const auto& atom : c.q.nu) r = std::max(r, atom_bounding_radius(atom));
    return 1.5 * r;
}

Solved solve_case(const Case& c, int n, std::optional<double> L = std::nullopt) {
    const TExtension ext = build_extension(c.q, c.rho);
    const Grid grid(n, L.value_or(half_width(c)));
    Solved s{rasterize(ext.sigma, grid, {PointSplat::tsc}), {}};
    s.result = solve_obstacle(s.sigma, solver_options());
    return s;
}

BackgroundPotential point_potential(double alpha, double t, Complex a, double beta) {
    BackgroundPotential q{alpha, {}, t};
    if (beta > 0.0) q.nu.push_back(PointMass{a, beta});
    return q;
}

std::vector<Case> random_cases() {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> alpha(0.2, 2.0), t(0.5, 2.0), beta(0.1, 1.5),
        radius(0.0, 1.2), angle(0.0, 2.0 * std::numbers::pi), stretch(1.0, 2.0);
    std::vector<Case> out;
    for (int k = 0; k < 20; ++k) {
        Case c;
        const double al = alpha(rng), tt = t(rng), be = beta(rng);
        c.q = point_potential(al, tt, {}, be);
        const double R = min_radius(c.q);
        const double ra = radius(rng) * R, th = angle(rng);
        c.q.nu[0] = PointMass{std::polar(ra, th), be};
        c.rho = stretch(rng) * R;
        out.push_back(c);
    }
    return out;
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

}  // namespace

int main() {
    const std::vector<Case> cases = random_cases();
    std::vector<Solved> fine;

    report(1, "Ginibre disk density, mass and Robin constant", [] {
        const auto t0 = std::chrono::steady_clock::now();
        Case c{point_potential(0.5, 1.0, {}, 0.0), 1.0};
        const Solved s = solve_case(c, 256, 2.0);
        const auto el = euler_lagrange_check(s.result.mu, c.q, extract_support(s.result.mu));
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const Grid& g = s.sigma.grid();
        double worst = 0.0;
        for (int j = 0; j < g.n; ++j) {
            for (int i = 0; i < g.n; ++i) {
                if (std::abs(g.center(i, j)) <= 1.0 - 2.0 * g.h()) {
                    worst = std::max(worst, std::abs(s.result.mu(i, j) * std::numbers::pi - 1.0));
                }
            }
        }
        const double mass = std::abs(s.result.mu.integral() - 1.0);
        std::ostringstream d;
        d << "rel density err " << worst << ", mass err " << mass << ", F " << el.F_estimate << ", time " << secs << "s";
        return Outcome{worst <= 0.03 && mass <= 1e-6 && std::abs(el.F_estimate - 0.5) <= 0.01 && secs <= 60.0, d.str()};
    });

    report(2, "annulus density, support, odometer and refinement rate", [] {
        Case c{point_potential(0.5, 1.0, {0.3, 0.0}, 1.0), std::sqrt(2.0)};
        const AnnulusReference ref = annulus_reference(0.5, 1.0, {0.3, 0.0}, 1.0, c.rho);
        std::vector<ReferenceErrors> errs;
        for (int n : {64, 128, 256}) {
            const Solved s = solve_case(c, n, 2.0);
            errs.push_back(compare_to_reference(s.result.mu, s.result.u, extract_support(s.result.mu), ref));
        }
        const ReferenceErrors& e = errs.back();
        const double rate1 = std::log2(errs[0].odometer_max_err / errs[1].odometer_max_err);
        const double rate2 = std::log2(errs[1].odometer_max_err / errs[2].odometer_max_err);
        std::ostringstream d;
        d << "density err " << e.density_max_err << " (<= " << 0.03 * ref.density << "), symmdiff "
          << e.support_symmdiff_area << " (<= " << e.support_symmdiff_bound << "), odometer " << errs[0].odometer_max_err
          << " / " << errs[1].odometer_max_err << " / " << e.odometer_max_err << ", rates " << rate1 << ", " << rate2;
        const bool ok = e.density_max_err <= 0.03 * ref.density && e.support_symmdiff_area <= e.support_symmdiff_bound &&
                        e.odometer_max_err <= 5e-3 && rate1 >= 1.5 && rate2 >= 1.5;
        return Outcome{ok, d.str()};
    });

    report(3, "invariant suite on 20 random configurations at n = 256", [&] {
        double mass = 0.0, bounds = 0.0, residual = 0.0;
        std::size_t outside = 0;
        for (const Case& c : cases) {
            fine.push_back(solve_case(c, 256));
            const Solved& s = fine.back();
            mass = std::max(mass, std::abs(s.result.mu.integral() - c.q.t));
            bounds = std::max(bounds, bounds_violation(s.result.mu, s.sigma));
            residual = std::max(residual, s.result.residual);
            outside += support_containment_violations(s.result.mu, s.sigma, 1e-8, 1);
        }
        std::ostringstream d;
        d << "max mass err " << mass << ", bounds " << bounds << ", outside cells " << outside << ", residual " << residual;
        return Outcome{mass <= 1e-6 && bounds <= 1e-8 && outside == 0 && residual <= 1e-8, d.str()};
    });

    report(4, "projected SOR vs divisible sandpile on 64 x 64", [&] {
        double worst = 0.0;
        for (const Case& c : cases) {
            const Solved s = solve_case(c, 64);
            const ScalarField pile = sandpile_oracle(s.sigma, s.result.u);
            worst = std::max(worst, max_abs_diff(pile, s.result.u) / std::max(s.result.u.max(), 1e-300));
        }
        return Outcome{worst <= 1e-6, "max |u_sor - u_pile| / max u = " + fmt("%.3g", worst)};
    });

    report(5, "support inside the one-cell dilation of D(0, R) for rho = R", [&] {
        std::size_t outside = 0;
        for (const Case& c : cases) {
            Case at_r = c;
            at_r.rho = min_radius(c.q);
            const Solved s = solve_case(at_r, 256);
            outside += disk_containment_violations(s.result.mu, at_r.rho, 1e-8);
        }
        return Outcome{outside == 0, std::to_string(outside) + " cells with mu > 1e-8 outside"};
    });

    report(6, "independence of the extension radius rho in {R, 1.25R, 1.5R}", [] {
        const BackgroundPotential q = point_potential(0.5, 1.0, {0.3, 0.0}, 1.0);
        const double R = min_radius(q);
        const double L = 1.5 * 1.5 * R;
        const double scale = 2.0 * q.alpha / std::numbers::pi;
        std::vector<Solved> runs;
        std::vector<CellMask> away;
        for (double f : {1.0, 1.25, 1.5}) {
            runs.push_back(solve_case({q, f * R}, 256, L));
            const CellMask m = extract_support(runs.back().result.mu);
            const CellMask inner = erode(m, 2), outer = dilate(m, 2);
            CellMask a(m.grid);
            for (std::size_t k = 0; k < a.cells.size(); ++k) a.cells[k] = inner.cells[k] || !outer.cells[k];
            away.push_back(a);
        }
        double interior = 0.0, all = 0.0;
        for (std::size_t a = 0; a < runs.size(); ++a) {
            for (std::size_t b = a + 1; b < runs.size(); ++b) {
                const Grid& g = runs[a].sigma.grid();
                for (int j = 0; j < g.n; ++j) {
                    for (int i = 0; i < g.n; ++i) {
                        const double d = std::abs(runs[a].result.mu(i, j) - runs[b].result.mu(i, j));
                        all = std::max(all, d);
                        if (away[a](i, j) && away[b](i, j)) interior = std::max(interior, d);
                    }
                }
            }
        }
        std::ostringstream d;
        d << "max diff away from free boundaries " << interior / scale << " of 2alpha/pi; including boundary cells "
          << all / scale;
        return Outcome{interior <= 0.02 * scale, d.str()};
    });

    report(7, "Euler-Lagrange characterization on the random configurations", [&] {
        double worst_std = 0.0, worst_gap = 1e300, worst_robin = 0.0;
        for (std::size_t k = 0; k < cases.size(); ++k) {
            const ScalarField& mu = fine[k].result.mu;
            const auto el = euler_lagrange_check(mu, cases[k].q, extract_support(mu));
            const double fe = robin_from_energy(mu, cases[k].q);
            worst_std = std::max(worst_std, el.on_support_std / (1.0 + std::abs(el.F_estimate)));
            worst_gap = std::min(worst_gap, el.off_support_min_gap);
            worst_robin = std::max(worst_robin, std::abs(fe - el.F_estimate));
        }
        std::ostringstream d;
        d << "std/(1+|F|) " << worst_std << ", min gap " << worst_gap << ", Robin routes " << worst_robin;
        return Outcome{!fine.empty() && worst_std <= 1e-2 && worst_gap >= -1e-3 && worst_robin <= 5e-2, d.str()};
    });

    report(8, "off-centre point charge: convergence, mass, hole around a", [] {
        const Complex a{1.5, 0.0};
        Case c{point_potential(0.5, 1.0, a, 1.0), 0.0};
        c.rho = min_radius(c.q);
        const Solved s = solve_case(c, 256);
        const Grid& g = s.sigma.grid();
        const auto cell = g.cell_of(a);
        if (!cell) return Outcome{false, "a lies outside the grid"};
        const double at_a = s.result.mu(cell->first, cell->second);
        const double mass = std::abs(s.result.mu.integral() - 1.0);
        std::ostringstream d;
        d << "converged " << s.result.converged << ", mass err " << mass << ", mu at a " << at_a;
        return Outcome{s.result.converged && mass <= 1e-6 && at_a <= 1e-8, d.str()};
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
