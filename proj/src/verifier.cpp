#include "balpot/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "balpot/errors.hpp"
#include "balpot/potential.hpp"

namespace balpot {

CellMask extract_support(const ScalarField& mu, double threshold_fraction) {
    if (!(threshold_fraction > 0.0 && threshold_fraction < 1.0)) {
        throw Error("support threshold fraction must lie in (0, 1)");
    }
    const double peak = mu.max();
    if (!(peak > 0.0)) throw EmptySupport("measure vanishes identically");
    const double cut = threshold_fraction * peak;
    CellMask mask(mu.grid());
    auto v = mu.values();
    for (std::size_t k = 0; k < v.size(); ++k) mask.cells[k] = v[k] >= cut ? 1 : 0;
    return mask;
}

EulerLagrangeResult euler_lagrange_check(const ScalarField& mu, const BackgroundPotential& q,
                                         const CellMask& mask, const EulerLagrangeOptions& options) {
    const Grid& g = mu.grid();
    const CellMask inner = erode(mask, options.margin);
    const CellMask near = dilate(mask, options.margin);

    std::vector<std::pair<int, int>> on_cells;
    std::vector<std::pair<int, int>> off_cells;
    double support_radius = 0.0;
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const Complex z = g.center(i, j);
            if (mask(i, j)) support_radius = std::max(support_radius, std::abs(z) + g.h());
            if (q.is_singular_at(z)) continue;
            if (inner(i, j)) {
                on_cells.emplace_back(i, j);
            } else if (!near(i, j) && g.layer(i, j) >= 2) {
                off_cells.emplace_back(i, j);
            }
        }
    }
    if (on_cells.empty()) throw EmptySupport("no support cells away from the support boundary");
    if (off_cells.size() > options.max_off_probes) {
        const std::size_t stride = (off_cells.size() + options.max_off_probes - 1) / options.max_off_probes;
        std::vector<std::pair<int, int>> thinned;
        for (std::size_t k = 0; k < off_cells.size(); k += stride) thinned.push_back(off_cells[k]);
        off_cells = std::move(thinned);
    }

    EulerLagrangeResult out;
    const auto on_u = potential_at_cells(mu, on_cells);
    std::vector<double> phi(on_cells.size());
    for (std::size_t k = 0; k < on_cells.size(); ++k) {
        phi[k] = on_u[k] + q(g.center(on_cells[k].first, on_cells[k].second));
    }
    const double mean = std::accumulate(phi.begin(), phi.end(), 0.0) / phi.size();
    double var = 0.0;
    for (double p : phi) var += (p - mean) * (p - mean);
    out.on_support_std = std::sqrt(var / phi.size());
    out.F_estimate = mean;
    out.on_probes = phi.size();
    if (out.on_support_std > 10.0 * options.spread_tolerance) {
        std::vector<double> sorted = phi;
        std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
        out.F_estimate = sorted[sorted.size() / 2];
        out.used_median = true;
    }

    double gap = std::numeric_limits<double>::infinity();
    const auto off_u = potential_at_cells(mu, off_cells);
    for (std::size_t k = 0; k < off_cells.size(); ++k) {
        const double value = off_u[k] + q(g.center(off_cells[k].first, off_cells[k].second));
        gap = std::min(gap, value - out.F_estimate);
    }
    std::size_t ring = 0;
    const double ring_radius = 1.5 * support_radius;
    if (ring_radius < g.L - 2.0 * g.h()) {
        constexpr int kRingProbes = 64;
        for (int k = 0; k < kRingProbes; ++k) {
            const Complex z = std::polar(ring_radius, 2.0 * std::numbers::pi * (k + 0.5) / kRingProbes);
            if (q.is_singular_at(z)) continue;
            gap = std::min(gap, potential_of_field(mu, z) + q(z) - out.F_estimate);
            ++ring;
        }
    }
    out.off_probes = off_cells.size() + ring;
    out.off_support_min_gap = out.off_probes > 0 ? gap : 0.0;
    return out;
}

double robin_from_energy(const ScalarField& mu, const BackgroundPotential& q) {
    const double q_integral = integrate_background(mu, q);
    const double v = logarithmic_energy(mu) + 2.0 * q_integral;
    return (v - q_integral) / q.t;
}

bool AnnulusReference::in_support(Complex z) const {
    return std::abs(z) <= R && (beta == 0.0 || std::abs(z - a) >= r);
}

double AnnulusReference::odometer_at_infinity() const {
    return 2.0 * alpha * R * R * std::log(R / rho) + alpha * (rho * rho - R * R);
}

double AnnulusReference::odometer(Complex z) const {
    double u = 0.0;
    const double w = std::abs(z - a);
    if (beta > 0.0 && w < r) {
        u += beta * std::log(r / w) + alpha * (w * w - r * r);
    }
    if (rho > R) {
        // circle mass swept into R < |z| < rho, shifted so it vanishes inside R
        const Complex origin{0.0, 0.0};
        const double arc = 2.0 * alpha * (rho * rho - R * R);
        const double ring = potential_uniform_circle(origin, rho, arc, z) -
                            potential_uniform_disk(origin, rho, density, z) +
                            potential_uniform_disk(origin, R, density, z);
        const double inside = potential_uniform_circle(origin, rho, arc, origin) -
                              potential_uniform_disk(origin, rho, density, origin) +
                              potential_uniform_disk(origin, R, density, origin);
        u += ring - inside;
    }
    return u;
}

AnnulusReference annulus_reference(double alpha, double beta, Complex a, double t,
                                   std::optional<double> rho) {
    if (!(alpha > 0.0) || !(t > 0.0) || !(beta >= 0.0)) {
        throw Error("annulus reference needs alpha > 0, t > 0, beta >= 0");
    }
    AnnulusReference ref;
    ref.alpha = alpha;
    ref.beta = beta;
    ref.a = a;
    ref.t = t;
    ref.R = std::sqrt((t + beta) / (2.0 * alpha));
    ref.r = std::sqrt(beta / (2.0 * alpha));
    ref.density = 2.0 * alpha / std::numbers::pi;
    ref.rho = rho.value_or(ref.R);
    if (ref.rho < ref.R * (1.0 - 1e-12)) throw RadiusTooSmall("reference rho below R");
    ref.case_i = std::abs(a) + ref.r <= ref.R;
    return ref;
}

ReferenceErrors compare_to_reference(const ScalarField& mu, const ScalarField& u,
                                     const CellMask& support, const AnnulusReference& ref,
                                     int margin) {
    if (!ref.case_i) throw WrongCase("reference comparison needs D(a, r) inside D(0, R)");
    const Grid& g = mu.grid();
    const double h = g.h();
    ReferenceErrors out;
    std::size_t mismatched = 0;
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const Complex z = g.center(i, j);
            const double s = std::abs(z);
            const double w = std::abs(z - ref.a);
            const bool analytic = ref.in_support(z);
            if (analytic != support(i, j)) ++mismatched;
            const bool deep = s <= ref.R - margin * h && (ref.beta == 0.0 || w >= ref.r + margin * h);
            if (deep) out.density_max_err = std::max(out.density_max_err, std::abs(mu(i, j) - ref.density));
            if (g.layer(i, j) >= 2 && (ref.beta == 0.0 || w >= 0.25 * ref.r)) {
                out.odometer_max_err = std::max(out.odometer_max_err, std::abs(u(i, j) - ref.odometer(z)));
            }
        }
    }
    out.support_symmdiff_area = static_cast<double>(mismatched) * g.cell_area();
    out.support_symmdiff_bound = 2.0 * h * 2.0 * std::numbers::pi * (ref.R + ref.r);
    return out;
}

double bounds_violation(const ScalarField& mu, const ScalarField& sigma) {
    auto m = mu.values();
    auto s = sigma.values();
    double worst = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) {
        const double sigma_minus = std::max(-s[k], 0.0);
        worst = std::max({worst, -m[k], m[k] - sigma_minus});
    }
    return worst;
}

std::size_t support_containment_violations(const ScalarField& mu, const ScalarField& sigma,
                                           double tol, int dilation) {
    CellMask negative(sigma.grid());
    auto s = sigma.values();
    for (std::size_t k = 0; k < s.size(); ++k) negative.cells[k] = s[k] < 0.0;
    const CellMask allowed = dilate(negative, dilation);
    std::size_t bad = 0;
    auto m = mu.values();
    for (std::size_t k = 0; k < m.size(); ++k) bad += (m[k] > tol && !allowed.cells[k]);
    return bad;
}

std::size_t disk_containment_violations(const ScalarField& mu, double radius, double tol) {
    const Grid& g = mu.grid();
    const double half = 0.5 * g.h();
    CellMask disk(g);
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            // nearest point of the cell box to the origin
            const double dx = std::max(std::abs(g.x(i)) - half, 0.0);
            const double dy = std::max(std::abs(g.y(j)) - half, 0.0);
            disk.at(i, j) = std::hypot(dx, dy) <= radius;
        }
    }
    const CellMask allowed = dilate(disk, 1);
    std::size_t bad = 0;
    auto m = mu.values();
    for (std::size_t k = 0; k < m.size(); ++k) bad += (m[k] > tol && !allowed.cells[k]);
    return bad;
}

VerificationReport verify(const ScalarField& sigma, const SolveResult& solved,
                          const BackgroundPotential& q, const VerifyOptions& options) {
    VerificationReport report;
    report.mass_error = std::abs(solved.mu.integral() - q.t);
    report.bounds_violation = bounds_violation(solved.mu, sigma);
    report.support_violations = support_containment_violations(solved.mu, sigma, options.zero_tol);
    report.complementarity_residual = solved.residual;
    report.boundary_band_max = solved.boundary_band_max;
    report.boundary_value = solved.boundary_value;
    report.iterations = solved.iterations;

    const CellMask support = extract_support(solved.mu, options.support_fraction);
    report.support_area = support.area();
    const auto el = euler_lagrange_check(solved.mu, q, support, options.euler_lagrange);
    report.F_estimate = el.F_estimate;
    report.on_support_std = el.on_support_std;
    report.off_support_min_gap = el.off_support_min_gap;
    report.F_used_median = el.used_median;
    report.F_from_energy = robin_from_energy(solved.mu, q);
    if (options.reference) {
        report.reference_errors = compare_to_reference(solved.mu, solved.u, support, *options.reference);
    }
    return report;
}

}  // namespace balpot
