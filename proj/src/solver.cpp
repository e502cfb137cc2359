#include "balpot/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <optional>
#include <sstream>

#include <Eigen/QR>

#include "balpot/errors.hpp"
#include "balpot/potential.hpp"

namespace balpot {

namespace {

constexpr int kDirichletLayers = 2;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Box {
    int i0, i1, j0, j1;  // inclusive; empty when i0 > i1

    bool empty() const { return i0 > i1 || j0 > j1; }
    void include(int i, int j) {
        i0 = std::min(i0, i);
        i1 = std::max(i1, i);
        j0 = std::min(j0, j);
        j1 = std::max(j1, j);
    }
};

Box empty_box() { return {1 << 30, -(1 << 30), 1 << 30, -(1 << 30)}; }

bool is_free(const Grid& g, int i, int j) { return g.layer(i, j) >= kDirichletLayers; }

void set_dirichlet(ScalarField& u, double kappa, const ScalarField* profile) {
    const Grid& g = u.grid();
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            if (is_free(g, i, j)) continue;
            u(i, j) = kappa + (profile ? (*profile)(i, j) : 0.0);
        }
    }
}

/// Potential at far targets of point masses near the origin:
///   -M log|z| + Re sum_k a_k / (k z^k),  a_k = sum m w^k.
class Multipole {
public:
    Multipole(double scale, int order) : scale_(scale), coeffs_(order + 1, Complex{}) {}

    void add(Complex w, double mass) {
        mass_ += mass;
        const Complex s = w / scale_;
        Complex p = mass;
        for (std::size_t k = 1; k < coeffs_.size(); ++k) {
            p *= s;
            coeffs_[k] += p;
        }
    }

    double operator()(Complex z) const {
        const Complex inv = scale_ / z;
        Complex p = 1.0;
        double sum = 0.0;
        for (std::size_t k = 1; k < coeffs_.size(); ++k) {
            p *= inv;
            sum += (coeffs_[k] * p).real() / static_cast<double>(k);
        }
        return -mass_ * std::log(std::abs(z)) + sum;
    }

private:
    double scale_;
    double mass_ = 0.0;
    std::vector<Complex> coeffs_;
};

struct FitContext {
    const ScalarField& sigma;
    double omega;
    long max_iter;
    double mass_tol;
    int max_steps;
    long sweeps = 0;
};

struct Fit {
    double kappa;
    double leak;
};

/// Root of the non-increasing map kappa -> boundary_leak with Dirichlet data
/// kappa + profile: secant steps until a sign change is bracketed, Illinois
/// after. Solves run at `loose` until kappa settles, then at `tol`.
Fit fit_kappa(FitContext& ctx, ScalarField& u, const ScalarField* profile, double kappa,
              double tol, double loose) {
    auto solve = [&](double k, double t) {
        set_dirichlet(u, k, profile);
        ctx.sweeps += projected_sor(ctx.sigma, u, ctx.omega, t, ctx.max_iter);
        return boundary_leak(u);
    };
    bool tight = loose <= tol;
    double f = solve(kappa, tight ? tol : loose);
    double k_prev = kappa, f_prev = f;
    bool have_prev = false;
    bool have_lo = false, have_hi = false;
    double k_lo = 0.0, f_lo = 0.0, k_hi = 0.0, f_hi = 0.0;
    int side = 0;
    for (int step = 0; step <= ctx.max_steps; ++step) {
        if (std::abs(f) <= ctx.mass_tol) {
            if (tight) return {kappa, f};
            tight = true;
            f = solve(kappa, tol);
            continue;
        }
        if (f > 0.0) {
            k_lo = kappa, f_lo = f, have_lo = true;
            if (side == -1) f_hi *= 0.5;
            side = -1;
        } else {
            k_hi = kappa, f_hi = f, have_hi = true;
            if (side == 1) f_lo *= 0.5;
            side = 1;
        }
        if (have_lo && have_hi && k_hi - k_lo <= 1e-15 * std::max(1.0, std::abs(k_hi))) {
            return {kappa, f};
        }
        double next;
        if (have_lo && have_hi) {
            next = (k_lo * f_hi - k_hi * f_lo) / (f_hi - f_lo);
        } else {
            const double slope = have_prev ? (f - f_prev) / (kappa - k_prev) : -1.0;
            const double reach = 16.0 * std::max(std::abs(kappa), std::abs(f));
            next = slope < 0.0 ? kappa - f / slope : kappa + (f > 0.0 ? reach : -reach);
            next = std::clamp(next, kappa - reach, kappa + reach);
        }
        if (!tight && std::abs(next - kappa) < 1e-6 * std::max(1.0, std::abs(kappa))) tight = true;
        k_prev = kappa, f_prev = f, have_prev = true;
        kappa = next;
        f = solve(kappa, tight ? tol : loose);
    }
    throw NotConverged("boundary value fit did not reach the mass tolerance", ctx.sweeps);
}

std::vector<std::size_t> dirichlet_cells(const Grid& g) {
    std::vector<std::size_t> out;
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            if (!is_free(g, i, j)) out.push_back(g.index(i, j));
        }
    }
    return out;
}

/// Anderson mixing for the fixed point x = f(x) over the last `depth` steps.
class Anderson {
public:
    explicit Anderson(int depth) : depth_(depth) {}

    std::vector<double> step(const std::vector<double>& x, const std::vector<double>& fx) {
        const Eigen::Index n = static_cast<Eigen::Index>(x.size());
        Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(x.data(), n);
        Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(fx.data(), n) - xv;
        xs_.push_back(xv);
        rs_.push_back(r);
        if (static_cast<int>(xs_.size()) > depth_ + 1) {
            xs_.pop_front();
            rs_.pop_front();
        }
        Eigen::VectorXd next = xv + r;
        const Eigen::Index m = static_cast<Eigen::Index>(xs_.size()) - 1;
        if (m > 0) {
            Eigen::MatrixXd dr(n, m), dx(n, m);
            for (Eigen::Index k = 0; k < m; ++k) {
                dr.col(k) = rs_[k + 1] - rs_[k];
                dx.col(k) = xs_[k + 1] - xs_[k];
            }
            const Eigen::VectorXd gamma = dr.colPivHouseholderQr().solve(r);
            next -= (dx + dr) * gamma;
        }
        return {next.data(), next.data() + n};
    }

private:
    int depth_;
    std::deque<Eigen::VectorXd> xs_, rs_;
};

}  // namespace

double resolve_omega(const SolverOptions& options, int n) {
    if (options.omega > 0.0) return options.omega;
    const int free_cells = std::max(n - 2 * kDirichletLayers, 2);
    return 2.0 / (1.0 + std::sin(std::numbers::pi / free_cells));
}

double density_tolerance(const Grid& grid, double omega, double tol, double u_max) {
    const double h2 = grid.cell_area();
    return 10.0 * 2.0 * tol * std::max(1.0, u_max) / (std::numbers::pi * omega * h2);
}

long projected_sor(const ScalarField& sigma, ScalarField& u_field, double omega, double tol,
                   long max_iter) {
    const Grid& g = sigma.grid();
    if (!(g == u_field.grid())) throw Error("sigma and u live on different grids");
    const int n = g.n;
    const double h2 = g.cell_area();
    const int lo = kDirichletLayers;
    const int hi = n - 1 - kDirichletLayers;

    std::vector<double> rhs(g.size(), 0.0);
    for (int j = lo; j <= hi; ++j) {
        for (int i = lo; i <= hi; ++i) rhs[g.index(i, j)] = kTwoPi * h2 * sigma(i, j);
    }

    std::span<double> u = u_field.values();
    // From an all-zero start with zero boundary, cells outside `active` (grown
    // by one) keep u = 0: zero neighbours and rhs <= 0 give a zero update.
    Box active{lo, hi, lo, hi};
    const bool all_zero = std::all_of(u.begin(), u.end(), [](double v) { return v == 0.0; });
    if (all_zero) {
        active = empty_box();
        for (int j = lo; j <= hi; ++j) {
            for (int i = lo; i <= hi; ++i) {
                if (rhs[g.index(i, j)] > 0.0) active.include(i, j);
            }
        }
    }

    long iter = 0;
    while (iter < max_iter) {
        ++iter;
        if (active.empty()) return iter;
        const int i0 = std::max(lo, active.i0 - 1), i1 = std::min(hi, active.i1 + 1);
        const int j0 = std::max(lo, active.j0 - 1), j1 = std::min(hi, active.j1 + 1);
        const bool full = i0 == lo && i1 == hi && j0 == lo && j1 == hi;
        double max_update = 0.0;
        double u_max = 0.0;
        for (int color = 0; color < 2; ++color) {
            for (int j = j0; j <= j1; ++j) {
                const std::size_t row = static_cast<std::size_t>(j) * n;
                int first = -1, last = -1;
                for (int i = i0 + ((i0 + j + color) & 1); i <= i1; i += 2) {
                    const std::size_t k = row + i;
                    const double old = u[k];
                    const double gs = 0.25 * (u[k - 1] + u[k + 1] + u[k - n] + u[k + n] + rhs[k]);
                    const double value = std::max(0.0, old + omega * (gs - old));
                    u[k] = value;
                    max_update = std::max(max_update, std::abs(value - old));
                    u_max = std::max(u_max, value);
                    if (!full && value > 0.0) {
                        if (first < 0) first = i;
                        last = i;
                    }
                }
                if (first >= 0) {
                    active.include(first, j);
                    active.include(last, j);
                }
            }
        }
        if (max_update < tol * std::max(1.0, u_max)) return iter;
    }
    std::ostringstream msg;
    msg << "projected SOR did not converge in " << iter << " sweeps";
    throw NotConverged(msg.str(), iter);
}

double boundary_leak(const ScalarField& u) {
    const Grid& g = u.grid();
    const int inner = kDirichletLayers;
    const int outer = g.n - 1 - kDirichletLayers;
    double flux = 0.0;
    for (int k = inner; k <= outer; ++k) {
        flux += u(inner, k) - u(inner - 1, k);
        flux += u(outer, k) - u(outer + 1, k);
        flux += u(k, inner) - u(k, inner - 1);
        flux += u(k, outer) - u(k, outer + 1);
    }
    return flux / kTwoPi;
}

ScalarField far_field_profile(const ScalarField& sigma, const ScalarField& u, int depth) {
    const Grid& g = u.grid();
    const int n = g.n;
    const double h = g.h();
    const double area = g.cell_area();
    const ScalarField lap = laplacian(u);

    struct Source {
        int i, j;
        double mass;
    };
    std::vector<Source> sources;
    double source_radius = 0.0;
    for (int j = kDirichletLayers; j < n - kDirichletLayers; ++j) {
        for (int i = kDirichletLayers; i < n - kDirichletLayers; ++i) {
            const double m = u(i, j) > 0.0 ? sigma(i, j) : -lap(i, j) / kTwoPi;
            if (m == 0.0) continue;
            sources.push_back({i, j, m * area});
        }
    }

    // Targets sit at |z| >= target_radius; sources inside 0.7 of that go
    // through the multipole, the rest are summed directly.
    const double target_radius = g.L - depth * h;
    const double split = 0.7 * std::max(target_radius, h);
    std::vector<Source> near;
    for (const Source& s : sources) {
        const double r = std::abs(g.center(s.i, s.j));
        if (r <= split) {
            source_radius = std::max(source_radius, r);
        } else {
            near.push_back(s);
        }
    }
    const double ratio = std::max(source_radius, h) / std::max(target_radius, h);
    const int order = std::clamp(static_cast<int>(std::ceil(std::log(1e-17) / std::log(ratio))), 4, 160);
    Multipole far(std::max(source_radius, h), order);
    for (const Source& s : sources) {
        if (std::abs(g.center(s.i, s.j)) <= split) far.add(g.center(s.i, s.j), s.mass);
    }

    const double self = cell_self_coefficient(g);
    ScalarField out(g);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            if (g.layer(i, j) >= depth) continue;
            const Complex z = g.center(i, j);
            double v = far(z);
            for (const Source& s : near) {
                v += (s.i == i && s.j == j) ? s.mass * self
                                            : -s.mass * std::log(std::abs(z - g.center(s.i, s.j)));
            }
            out(i, j) = v;
        }
    }
    return out;
}

SolveResult solve_obstacle(const ScalarField& sigma, const SolverOptions& options) {
    const Grid& g = sigma.grid();
    const int n = g.n;
    const double omega = resolve_omega(options, n);
    if (!(omega >= 1.0 && omega < 2.0)) throw Error("relaxation factor must lie in [1, 2)");
    if (!(options.tol > 0.0)) throw Error("solver tolerance must be positive");
    if (n < 2 * kDirichletLayers + 2) throw Error("grid too small for the Dirichlet layers");
    const int band = std::max(2, options.band_cells);
    const double mass = sigma.integral();
    if (!(mass < 0.0)) {
        std::ostringstream msg;
        msg << "total mass of sigma must be negative, got " << mass;
        throw MassNotNegative(msg.str());
    }

    FitContext ctx{sigma, omega, options.max_iter > 0 ? options.max_iter : 200L * n,
                   options.mass_tol, options.max_boundary_steps};
    const double loose = std::max(options.tol, 1e-9);

    ScalarField u(g);
    ctx.sweeps += projected_sor(sigma, u, omega, options.tol, ctx.max_iter);
    Fit fit{0.0, boundary_leak(u)};
    std::optional<ScalarField> profile;
    int updates = 0;

    if (options.boundary != BoundaryMode::zero && fit.leak > options.mass_tol) {
        fit = fit_kappa(ctx, u, nullptr, 0.0, options.tol, loose);
        if (options.boundary == BoundaryMode::far_field) {
            const std::vector<std::size_t> edge = dirichlet_cells(g);
            Anderson mixer(5);
            ScalarField data(g);
            bool tight = false;
            for (;;) {
                if (updates >= options.max_profile_updates) {
                    throw NotConverged("far-field boundary profile did not settle", ctx.sweeps);
                }
                const ScalarField next = far_field_profile(sigma, u, kDirichletLayers);
                ++updates;
                std::vector<double> x(edge.size()), fx(edge.size());
                double change = 0.0;
                for (std::size_t k = 0; k < edge.size(); ++k) {
                    x[k] = data.values()[edge[k]];
                    fx[k] = next.values()[edge[k]];
                    change = std::max(change, std::abs(fx[k] - x[k]));
                }
                const double scale = std::max(1.0, u.max());
                if (tight && change < options.profile_tol * scale) break;
                if (change < 1e2 * options.profile_tol * scale) tight = true;
                const std::vector<double> mixed = mixer.step(x, fx);
                for (std::size_t k = 0; k < edge.size(); ++k) data.values()[edge[k]] = mixed[k];
                fit = fit_kappa(ctx, u, &data, fit.kappa, options.tol, tight ? options.tol : loose);
            }
            profile = far_field_profile(sigma, u, kDirichletLayers + band);
        }
    }

    SolveResult result;
    result.omega = omega;
    result.iterations = ctx.sweeps;
    result.converged = true;
    result.boundary_value = fit.kappa;
    result.mass_leak = fit.leak;
    result.profile_updates = updates;
    result.residual = complementarity_residual(sigma, u);
    result.mu = recover_measure(sigma, u, density_tolerance(g, omega, options.tol, u.max()));
    ScalarField model(g, fit.kappa);
    if (profile) model += *profile;
    result.boundary_band_max = boundary_band_check(u, model, band);
    result.u = std::move(u);
    return result;
}

ScalarField sandpile_oracle(const ScalarField& sigma, const SandpileOptions& options) {
    return sandpile_oracle(sigma, ScalarField(sigma.grid()), options);
}

ScalarField sandpile_oracle(const ScalarField& sigma, const ScalarField& dirichlet,
                            const SandpileOptions& options) {
    const Grid& g = sigma.grid();
    if (!(g == dirichlet.grid())) throw Error("sigma and boundary data live on different grids");
    const int n = g.n;
    const double mass = sigma.integral();
    if (!(mass < 0.0)) throw MassNotNegative("total mass of sigma must be negative");
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            if (!is_free(g, i, j) && dirichlet(i, j) < 0.0) {
                throw Error("boundary values must be non-negative");
            }
        }
    }
    const long max_rounds = options.max_rounds > 0 ? options.max_rounds : 50L * n * n;

    const double h2 = g.cell_area();
    std::vector<double> pile(g.size()), capacity(g.size()), emitted(g.size(), 0.0);
    double initial = 0.0;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const std::size_t k = g.index(i, j);
            pile[k] = std::max(sigma(i, j), 0.0) * h2;
            capacity[k] = std::max(-sigma(i, j), 0.0) * h2;
        }
    }
    const int lo = kDirichletLayers, hi = n - 1 - kDirichletLayers;
    for (int k = lo; k <= hi; ++k) {
        pile[g.index(lo, k)] += dirichlet(lo - 1, k) / kTwoPi;
        pile[g.index(hi, k)] += dirichlet(hi + 1, k) / kTwoPi;
        pile[g.index(k, lo)] += dirichlet(k, lo - 1) / kTwoPi;
        pile[g.index(k, hi)] += dirichlet(k, hi + 1) / kTwoPi;
    }
    for (double p : pile) initial += p;

    ScalarField out(g);
    if (initial > 0.0) {
        long round = 0;
        for (; round < max_rounds; ++round) {
            // in-place sweeps: toppling order does not change the limit
            double total_excess = 0.0;
            for (int j = lo; j <= hi; ++j) {
                for (int i = lo; i <= hi; ++i) {
                    const std::size_t k = g.index(i, j);
                    const double e = pile[k] - capacity[k];
                    if (e <= 0.0) continue;
                    total_excess += e;
                    emitted[k] += e;
                    pile[k] = capacity[k];
                    const double quarter = 0.25 * e;
                    pile[k - 1] += quarter;
                    pile[k + 1] += quarter;
                    pile[k - n] += quarter;
                    pile[k + n] += quarter;
                }
            }
            if (total_excess < options.tol * initial) break;
        }
        if (round == max_rounds) throw NotConverged("divisible sandpile did not stabilize", round);
    }
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            out(i, j) = is_free(g, i, j) ? 0.5 * std::numbers::pi * emitted[g.index(i, j)]
                                         : dirichlet(i, j);
        }
    }
    return out;
}

ScalarField laplacian(const ScalarField& u) {
    const Grid& g = u.grid();
    const int n = g.n;
    const double inv_h2 = 1.0 / g.cell_area();
    ScalarField out(g);
    auto at = [&](int i, int j) {
        return u(std::clamp(i, 0, n - 1), std::clamp(j, 0, n - 1));
    };
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            out(i, j) = (at(i - 1, j) + at(i + 1, j) + at(i, j - 1) + at(i, j + 1) - 4.0 * u(i, j)) * inv_h2;
        }
    }
    return out;
}

ScalarField recover_measure(const ScalarField& sigma, const ScalarField& u, double tol) {
    if (!(sigma.grid() == u.grid())) throw Error("sigma and u live on different grids");
    const Grid& g = sigma.grid();
    const ScalarField lap = laplacian(u);
    ScalarField mu(g);
    double worst = 0.0;
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            if (!is_free(g, i, j)) continue;
            double v = -sigma(i, j) - lap(i, j) / kTwoPi;
            if (v < 0.0) {
                worst = std::min(worst, v);
                v = 0.0;
            }
            mu(i, j) = v;
        }
    }
    if (worst < -tol) {
        std::ostringstream msg;
        msg << "recovered density reaches " << worst << ", below -" << tol;
        throw NegativeDensity(msg.str());
    }
    return mu;
}

double complementarity_residual(const ScalarField& sigma, const ScalarField& u) {
    const Grid& g = sigma.grid();
    const ScalarField lap = laplacian(u);
    double r = 0.0;
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            if (!is_free(g, i, j)) continue;
            const double w = -lap(i, j) / kTwoPi - sigma(i, j);
            r = std::max(r, std::abs(std::min(u(i, j), w)));
        }
    }
    return r;
}

ScalarField bal_general(const ScalarField& mu, const ScalarField& lambda, const SolverOptions& options) {
    const ScalarField diff = mu - lambda;
    const SolveResult solved = solve_obstacle(diff, options);
    ScalarField out = lambda;
    out -= solved.mu;
    return out;
}

double boundary_band_check(const ScalarField& u, int band_cells) {
    return boundary_band_check(u, ScalarField(u.grid()), band_cells);
}

double boundary_band_check(const ScalarField& u, const ScalarField& model, int band_cells) {
    if (band_cells < 2) throw Error("boundary band needs at least two cell layers");
    const Grid& g = u.grid();
    double m = 0.0;
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const int layer = g.layer(i, j);
            if (layer >= kDirichletLayers && layer < kDirichletLayers + band_cells) {
                m = std::max(m, std::abs(u(i, j) - model(i, j)));
            }
        }
    }
    return m;
}

}  // namespace balpot
