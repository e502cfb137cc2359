#include "balpot/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "balpot/errors.hpp"

namespace balpot {

namespace {

using nlohmann::json;

constexpr int kMaxEnlargements = 3;

[[noreturn]] void config_fail(const std::string& what) { throw ConfigError(what); }

void reject_unknown(const json& obj, const std::string& where, std::set<std::string> allowed) {
    if (!obj.is_object()) config_fail(where + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) config_fail("unknown key '" + key + "' in " + where);
    }
}

double number(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) config_fail(where + "." + key + " is required");
    const json& v = obj.at(key);
    if (!v.is_number()) config_fail(where + "." + key + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) config_fail(where + "." + key + " must be finite");
    return x;
}

double number_or(const json& obj, const std::string& key, const std::string& where, double fallback) {
    return obj.contains(key) ? number(obj, key, where) : fallback;
}

Complex point(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) config_fail(where + "." + key + " is required");
    const json& v = obj.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        config_fail(where + "." + key + " must be [x, y]");
    }
    return {v[0].get<double>(), v[1].get<double>()};
}

MeasureAtom parse_atom(const json& obj, const std::string& where) {
    if (!obj.is_object() || !obj.contains("type") || !obj.at("type").is_string()) {
        config_fail(where + " needs a string 'type'");
    }
    const std::string type = obj.at("type").get<std::string>();
    MeasureAtom atom;
    if (type == "point") {
        reject_unknown(obj, where, {"type", "location", "mass"});
        atom = PointMass{point(obj, "location", where), number(obj, "mass", where)};
    } else if (type == "disk") {
        reject_unknown(obj, where, {"type", "center", "radius", "density"});
        atom = UniformDisk{point(obj, "center", where), number(obj, "radius", where),
                           number(obj, "density", where)};
    } else if (type == "circle") {
        reject_unknown(obj, where, {"type", "center", "radius", "mass"});
        atom = UniformCircle{point(obj, "center", where), number(obj, "radius", where),
                             number(obj, "mass", where)};
    } else {
        config_fail(where + ": unknown atom type '" + type + "'");
    }
    try {
        validate_atom(atom);
    } catch (const Error& e) {
        config_fail(where + ": " + e.what());
    }
    return atom;
}

json atom_json(const MeasureAtom& atom) {
    auto xy = [](Complex z) { return json::array({z.real(), z.imag()}); };
    if (const auto* p = std::get_if<PointMass>(&atom)) {
        return {{"type", "point"}, {"location", xy(p->location)}, {"mass", p->mass}};
    }
    if (const auto* d = std::get_if<UniformDisk>(&atom)) {
        return {{"type", "disk"}, {"center", xy(d->center)}, {"radius", d->radius}, {"density", d->density}};
    }
    const auto& c = std::get<UniformCircle>(atom);
    return {{"type", "circle"}, {"center", xy(c.center)}, {"radius", c.radius}, {"mass", c.total_mass}};
}

const char* splat_name(PointSplat s) {
    switch (s) {
        case PointSplat::cell: return "cell";
        case PointSplat::bilinear: return "bilinear";
        case PointSplat::tsc: return "tsc";
    }
    return "tsc";
}

const char* boundary_name(BoundaryMode m) {
    switch (m) {
        case BoundaryMode::zero: return "zero";
        case BoundaryMode::constant: return "constant";
        case BoundaryMode::far_field: return "far_field";
    }
    return "far_field";
}

double nu_radius(const BackgroundPotential& q) {
    double r = 0.0;
    for (const auto& atom : q.nu) r = std::max(r, atom_bounding_radius(atom));
    return r;
}

void check_rho(const BackgroundPotential& q, double rho) {
    const double R = min_radius(q);
    if (!(rho >= R * (1.0 - 1e-12))) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "rho = " << rho << " is below the minimal radius sqrt((t + nu(C)) / (2 alpha)) = " << R;
        config_fail(msg.str());
    }
}

double round12(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return std::strtod(buf, nullptr);
}

json num(double x) { return std::isfinite(x) ? json(round12(x)) : json(nullptr); }

json round_all(const json& j) {
    if (j.is_number_float()) return num(j.get<double>());
    if (j.is_object() || j.is_array()) {
        json out = j;
        for (auto& v : out) v = round_all(v);
        return out;
    }
    return j;
}

json config_to_json(const RunConfig& c) {
    json nu = json::array();
    for (const auto& atom : c.potential.nu) nu.push_back(atom_json(atom));
    const SolverOptions& s = c.solver.options;
    json out = {
        {"potential", {{"alpha", c.potential.alpha}, {"t", c.potential.t}, {"nu", nu}}},
        {"rho", resolved_rho(c)},
        {"grid", {{"n", c.grid.n}, {"L", resolved_half_width(c)}, {"point_splat", splat_name(c.grid.point_splat)}}},
        {"solver",
         {{"omega", s.omega},
          {"tol", s.tol},
          {"max_iter", s.max_iter},
          {"band_cells", s.band_cells},
          {"band_tol", c.solver.band_tol},
          {"boundary", boundary_name(s.boundary)},
          {"auto_enlarge", c.solver.auto_enlarge}}},
        {"verify", json::object()},
        {"output_dir", c.output_dir},
    };
    if (c.reference) {
        out["verify"]["reference"] = {{"type", "annulus"},
                                      {"a", json::array({c.reference->a.real(), c.reference->a.imag()})},
                                      {"beta", c.reference->beta}};
    }
    return out;
}

struct Attempt {
    TExtension extension;
    ScalarField sigma;
    SolveResult solved;
};

Attempt solve_once(const RunConfig& config, double L) {
    const double rho = resolved_rho(config);
    Attempt a{build_extension(config.potential, rho), ScalarField(Grid(config.grid.n, L)), {}};
    const Grid grid(config.grid.n, L);
    try {
        a.sigma = rasterize(a.extension.sigma, grid, {config.grid.point_splat});
    } catch (const SupportOutsideGrid& e) {
        config_fail(std::string("grid too small: ") + e.what());
    }
    a.solved = solve_obstacle(a.sigma, config.solver.options);
    return a;
}

bool band_certified(const RunConfig& config, const SolveResult& solved) {
    return solved.boundary_band_max <= config.solver.band_tol * std::max(1.0, solved.u.max());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed for " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

template <class F>
int guarded(std::ostream& log, F&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const RadiusTooSmall& e) {
        log << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const MassNotNegative& e) {
        log << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const NotConverged& e) {
        log << "not converged after " << e.iterations() << " sweeps: " << e.what() << '\n';
        return exit_not_converged;
    } catch (const NegativeDensity& e) {
        log << "not converged: " << e.what() << '\n';
        return exit_not_converged;
    } catch (const Error& e) {
        log << "verification failed: " << e.what() << '\n';
        return exit_verification;
    }
}

/// Cells at least `margin` cells from the boundary of the mask on both sides.
CellMask away_from_boundary(const CellMask& mask, int margin) {
    const CellMask inner = erode(mask, margin);
    const CellMask outer = dilate(mask, margin);
    CellMask out(mask.grid);
    for (std::size_t k = 0; k < out.cells.size(); ++k) out.cells[k] = inner.cells[k] || !outer.cells[k];
    return out;
}

}  // namespace

RunConfig parse_config(std::string_view json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        config_fail(std::string("malformed JSON: ") + e.what());
    }
    reject_unknown(root, "config", {"potential", "rho", "grid", "solver", "verify", "output_dir"});

    RunConfig c;
    if (!root.contains("potential")) config_fail("config.potential is required");
    const json& pot = root.at("potential");
    reject_unknown(pot, "potential", {"alpha", "t", "nu"});
    c.potential.alpha = number(pot, "alpha", "potential");
    c.potential.t = number(pot, "t", "potential");
    if (pot.contains("nu")) {
        const json& nu = pot.at("nu");
        if (!nu.is_array()) config_fail("potential.nu must be a list of atoms");
        for (std::size_t k = 0; k < nu.size(); ++k) {
            c.potential.nu.push_back(parse_atom(nu[k], "potential.nu[" + std::to_string(k) + "]"));
        }
    }
    try {
        c.potential.validate();
    } catch (const Error& e) {
        config_fail(std::string("potential: ") + e.what());
    }

    if (root.contains("rho") && !root.at("rho").is_null()) c.rho = number(root, "rho", "config");

    if (root.contains("grid")) {
        const json& g = root.at("grid");
        reject_unknown(g, "grid", {"n", "L", "point_splat"});
        if (g.contains("n")) {
            if (!g.at("n").is_number_integer()) config_fail("grid.n must be an integer");
            c.grid.n = g.at("n").get<int>();
        }
        if (g.contains("L") && !g.at("L").is_null()) c.grid.L = number(g, "L", "grid");
        if (g.contains("point_splat")) {
            const std::string s = g.at("point_splat").is_string() ? g.at("point_splat").get<std::string>() : "";
            if (s == "cell") c.grid.point_splat = PointSplat::cell;
            else if (s == "bilinear") c.grid.point_splat = PointSplat::bilinear;
            else if (s == "tsc") c.grid.point_splat = PointSplat::tsc;
            else config_fail("grid.point_splat must be one of cell, bilinear, tsc");
        }
    }
    if (c.grid.n % 2 != 0 || c.grid.n < 32 || c.grid.n > 2048) {
        config_fail("grid.n must be even and within [32, 2048], got " + std::to_string(c.grid.n));
    }
    if (c.grid.L && !(*c.grid.L > 0.0)) config_fail("grid.L must be positive");

    if (root.contains("solver")) {
        const json& s = root.at("solver");
        reject_unknown(s, "solver", {"omega", "tol", "max_iter", "band_cells", "band_tol", "boundary", "auto_enlarge"});
        SolverOptions& o = c.solver.options;
        o.omega = number_or(s, "omega", "solver", o.omega);
        o.tol = number_or(s, "tol", "solver", o.tol);
        if (s.contains("max_iter")) {
            if (!s.at("max_iter").is_number_integer()) config_fail("solver.max_iter must be an integer");
            o.max_iter = s.at("max_iter").get<long>();
        }
        if (s.contains("band_cells")) {
            if (!s.at("band_cells").is_number_integer()) config_fail("solver.band_cells must be an integer");
            o.band_cells = s.at("band_cells").get<int>();
        }
        c.solver.band_tol = number_or(s, "band_tol", "solver", c.solver.band_tol);
        if (s.contains("boundary")) {
            const std::string b = s.at("boundary").is_string() ? s.at("boundary").get<std::string>() : "";
            if (b == "zero") o.boundary = BoundaryMode::zero;
            else if (b == "constant") o.boundary = BoundaryMode::constant;
            else if (b == "far_field") o.boundary = BoundaryMode::far_field;
            else config_fail("solver.boundary must be one of zero, constant, far_field");
        }
        if (s.contains("auto_enlarge")) {
            if (!s.at("auto_enlarge").is_boolean()) config_fail("solver.auto_enlarge must be true or false");
            c.solver.auto_enlarge = s.at("auto_enlarge").get<bool>();
        }
        if (o.omega > 0.0 && !(o.omega >= 1.0 && o.omega < 2.0)) config_fail("solver.omega must lie in [1, 2) or be <= 0 for auto");
        if (!(o.tol > 0.0)) config_fail("solver.tol must be positive");
        if (o.max_iter < 0) config_fail("solver.max_iter must be non-negative");
        if (o.band_cells < 2) config_fail("solver.band_cells must be at least 2");
        if (!(c.solver.band_tol > 0.0)) config_fail("solver.band_tol must be positive");
    }

    if (root.contains("verify")) {
        const json& v = root.at("verify");
        reject_unknown(v, "verify", {"reference"});
        if (v.contains("reference") && !v.at("reference").is_null()) {
            const json& r = v.at("reference");
            reject_unknown(r, "verify.reference", {"type", "a", "beta"});
            if (!r.contains("type") || r.at("type") != "annulus") config_fail("verify.reference.type must be \"annulus\"");
            ReferenceConfig ref{point(r, "a", "verify.reference"), number(r, "beta", "verify.reference")};
            if (!(ref.beta >= 0.0)) config_fail("verify.reference.beta must be non-negative");
            const auto& nu = c.potential.nu;
            const bool matches =
                ref.beta == 0.0 ? nu.empty()
                                : nu.size() == 1 && std::holds_alternative<PointMass>(nu[0]) &&
                                      std::get<PointMass>(nu[0]).location == ref.a &&
                                      std::get<PointMass>(nu[0]).mass == ref.beta;
            if (!matches) config_fail("verify.reference must describe nu: one point mass beta at a, or beta = 0 with nu empty");
            c.reference = ref;
        }
    }

    if (root.contains("output_dir")) {
        if (!root.at("output_dir").is_string()) config_fail("output_dir must be a string");
        c.output_dir = root.at("output_dir").get<std::string>();
    }

    if (c.rho) check_rho(c.potential, *c.rho);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string config_json(const RunConfig& config, int indent) { return config_to_json(config).dump(indent); }

double resolved_rho(const RunConfig& config) { return config.rho.value_or(min_radius(config.potential)); }

double resolved_half_width(const RunConfig& config) {
    if (config.grid.L) return *config.grid.L;
    return 1.5 * std::max(resolved_rho(config), nu_radius(config.potential));
}

RunArtifacts execute(const RunConfig& config, std::ostream& log) {
    check_rho(config.potential, resolved_rho(config));
    RunArtifacts run{config, {}, ScalarField(Grid(config.grid.n, resolved_half_width(config))), {}, {}, {}, {}, 0};
    double L = resolved_half_width(config);
    Attempt attempt = solve_once(config, L);
    while (config.solver.auto_enlarge && !band_certified(config, attempt.solved) &&
           run.enlargements < kMaxEnlargements) {
        L *= 2.0;
        ++run.enlargements;
        log << "boundary band " << attempt.solved.boundary_band_max << " too large; enlarging L to " << L
            << " (n = " << config.grid.n << ")\n";
        attempt = solve_once(config, L);
    }
    run.config.grid.L = L;
    run.extension = std::move(attempt.extension);
    run.sigma = std::move(attempt.sigma);
    run.solved = std::move(attempt.solved);

    VerifyOptions vo;
    if (config.reference) {
        run.reference = annulus_reference(config.potential.alpha, config.reference->beta, config.reference->a,
                                          config.potential.t, resolved_rho(config));
        if (run.reference->case_i) vo.reference = run.reference;
    }
    run.report = verify(run.sigma, run.solved, config.potential, vo);
    run.failures = failed_checks(run);
    return run;
}

std::vector<std::string> failed_checks(const RunArtifacts& run) {
    const VerificationReport& r = run.report;
    std::vector<std::string> out;
    auto require = [&](bool ok, const char* name) {
        if (!ok) out.emplace_back(name);
    };
    require(r.mass_error <= 1e-6, "mass_error");
    require(r.bounds_violation <= 1e-8, "bounds_violation");
    require(r.support_violations == 0, "support_containment");
    require(r.complementarity_residual <= 1e-8, "complementarity_residual");
    require(band_certified(run.config, run.solved), "boundary_band");
    require(r.on_support_std <= 1e-2 * (1.0 + std::abs(r.F_estimate)), "on_support_std");
    require(r.off_support_min_gap >= -1e-3, "off_support_min_gap");
    require(std::abs(r.F_estimate - r.F_from_energy) <= 5e-2, "robin_agreement");
    if (r.reference_errors && run.reference) {
        require(r.reference_errors->density_max_err <= 0.03 * run.reference->density, "density_max_err");
        require(r.reference_errors->support_symmdiff_area <= r.reference_errors->support_symmdiff_bound,
                "support_symmdiff_area");
    }
    return out;
}

void write_field_csv(const ScalarField& field, const std::filesystem::path& path) {
    const Grid& g = field.grid();
    std::string text = "# " + std::to_string(g.n) + ' ' + g17(g.L) + ' ' + g17(g.h()) + '\n';
    text.reserve(text.size() + static_cast<std::size_t>(g.n) * g.n * 25);
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            if (i) text += ',';
            text += g17(field(i, j));
        }
        text += '\n';
    }
    write_text(path, text);
}

void write_support_pgm(const CellMask& mask, const std::filesystem::path& path) {
    const int n = mask.grid.n;
    std::string bytes = "P5\n" + std::to_string(n) + ' ' + std::to_string(n) + "\n255\n";
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) bytes += static_cast<char>(mask(i, j) ? 255 : 0);
    }
    write_text(path, bytes);
}

std::string report_json(const RunArtifacts& run, int indent) {
    const VerificationReport& r = run.report;
    const Grid& g = run.sigma.grid();
    json ref = nullptr;
    if (r.reference_errors) {
        ref = {{"density_max_err", num(r.reference_errors->density_max_err)},
               {"support_symmdiff_area", num(r.reference_errors->support_symmdiff_area)},
               {"support_symmdiff_bound", num(r.reference_errors->support_symmdiff_bound)},
               {"odometer_max_err", num(r.reference_errors->odometer_max_err)}};
    }
    json out = {
        {"mass_error", num(r.mass_error)},
        {"F_estimate", num(r.F_estimate)},
        {"F_from_energy", num(r.F_from_energy)},
        {"F_used_median", r.F_used_median},
        {"on_support_std", num(r.on_support_std)},
        {"off_support_min_gap", num(r.off_support_min_gap)},
        {"bounds_violation", num(r.bounds_violation)},
        {"support_violations", r.support_violations},
        {"support_area", num(r.support_area)},
        {"complementarity_residual", num(r.complementarity_residual)},
        {"boundary_band_max", num(r.boundary_band_max)},
        {"boundary_value", num(r.boundary_value)},
        {"extension_constant", num(run.extension.c)},
        {"iterations", r.iterations},
        {"enlargements", run.enlargements},
        {"reference_errors", ref},
        {"grid", {{"n", g.n}, {"L", num(g.L)}, {"h", num(g.h())}}},
        {"failed_checks", run.failures},
        {"config_echo", round_all(config_to_json(run.config))},
    };
    return out.dump(indent) + '\n';
}

int run_solve(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log) {
    return guarded(log, [&] {
        ensure_dir(out_dir);
        const RunArtifacts run = execute(config, log);
        write_field_csv(run.solved.u, out_dir / "u.csv");
        write_field_csv(run.solved.mu, out_dir / "mu.csv");
        write_field_csv(run.sigma, out_dir / "sigma.csv");
        write_support_pgm(extract_support(run.solved.mu), out_dir / "support.pgm");
        write_text(out_dir / "report.json", report_json(run));
        for (const auto& name : run.failures) log << "check failed: " << name << '\n';
        return run.failures.empty() ? exit_ok : exit_verification;
    });
}

int run_convergence(const RunConfig& config, int levels, const std::filesystem::path& out_dir,
                    std::ostream& log) {
    return guarded(log, [&] {
        if (levels < 1) config_fail("levels must be at least 1");
        if (!config.reference) config_fail("converge needs verify.reference");
        if (static_cast<long>(config.grid.n) << (levels - 1) > 2048) config_fail("finest grid would exceed n = 2048");
        ensure_dir(out_dir);

        RunConfig level = config;
        level.grid.L = resolved_half_width(config);
        level.solver.auto_enlarge = false;
        constexpr double kFloor = 1e-10;
        std::string csv = "n,h,odometer_max_err,density_max_err,odometer_rate,density_rate\n";
        std::vector<std::string> failures;
        double prev_odo = 0.0, prev_dens = 0.0;
        for (int k = 0; k < levels; ++k) {
            level.grid.n = config.grid.n << k;
            const RunArtifacts run = execute(level, log);
            if (!run.report.reference_errors) throw WrongCase("reference is not in case (i)");
            const double odo = run.report.reference_errors->odometer_max_err;
            const double dens = run.report.reference_errors->density_max_err;
            std::string odo_rate, dens_rate;
            if (k > 0) {
                if (prev_odo > kFloor && odo > kFloor) {
                    const double rate = std::log2(prev_odo / odo);
                    odo_rate = g17(rate);
                    if (rate < 1.5) failures.push_back("odometer rate at n = " + std::to_string(level.grid.n));
                }
                if (prev_dens > kFloor && dens > kFloor) dens_rate = g17(std::log2(prev_dens / dens));
            }
            for (const std::string& name : {std::string("mass_error"), std::string("bounds_violation"),
                                            std::string("support_containment"), std::string("complementarity_residual")}) {
                if (std::find(run.failures.begin(), run.failures.end(), name) != run.failures.end()) {
                    failures.push_back(name + " at n = " + std::to_string(level.grid.n));
                }
            }
            csv += std::to_string(level.grid.n) + ',' + g17(run.sigma.grid().h()) + ',' + g17(odo) + ',' +
                   g17(dens) + ',' + odo_rate + ',' + dens_rate + '\n';
            log << "n = " << level.grid.n << ": odometer error " << odo << ", density error " << dens << '\n';
            prev_odo = odo;
            prev_dens = dens;
        }
        write_text(out_dir / "convergence.csv", csv);
        for (const auto& name : failures) log << "check failed: " << name << '\n';
        return failures.empty() ? exit_ok : exit_verification;
    });
}

int run_rho_sweep(const RunConfig& config, const std::vector<double>& rhos,
                  const std::filesystem::path& out_dir, std::ostream& log) {
    return guarded(log, [&] {
        if (rhos.empty()) config_fail("rho list is empty");
        for (double rho : rhos) check_rho(config.potential, rho);
        ensure_dir(out_dir);

        RunConfig base = config;
        base.solver.auto_enlarge = false;
        RunConfig widest = config;
        widest.grid.L.reset();
        widest.rho = *std::max_element(rhos.begin(), rhos.end());
        const double needed = resolved_half_width(widest);
        if (!base.grid.L || *base.grid.L < needed) {
            if (base.grid.L) log << "widening L from " << *base.grid.L << " to " << needed << " for rho = " << *widest.rho << '\n';
            base.grid.L = needed;
        }
        std::vector<ScalarField> mus;
        std::vector<CellMask> masks;
        for (double rho : rhos) {
            RunConfig c = base;
            c.rho = rho;
            const RunArtifacts run = execute(c, log);
            log << "rho = " << rho << ": kappa " << run.solved.boundary_value << ", F " << run.report.F_estimate << '\n';
            for (const auto& name : run.failures) {
                if (name == "mass_error" || name == "bounds_violation" || name == "complementarity_residual") {
                    throw Error(name + " failed at rho = " + g17(rho));
                }
            }
            masks.push_back(away_from_boundary(extract_support(run.solved.mu), 2));
            mus.push_back(run.solved.mu);
        }
        const double scale = 2.0 * config.potential.alpha / std::numbers::pi;
        std::string csv = "rho_a,rho_b,max_diff,max_diff_interior,relative_interior\n";
        bool ok = true;
        for (std::size_t a = 0; a < rhos.size(); ++a) {
            for (std::size_t b = a + 1; b < rhos.size(); ++b) {
                const Grid& g = mus[a].grid();
                double all = 0.0, interior = 0.0;
                for (int j = 0; j < g.n; ++j) {
                    for (int i = 0; i < g.n; ++i) {
                        const double d = std::abs(mus[a](i, j) - mus[b](i, j));
                        all = std::max(all, d);
                        if (masks[a](i, j) && masks[b](i, j)) interior = std::max(interior, d);
                    }
                }
                const double rel = interior / scale;
                if (rel > 0.02) {
                    ok = false;
                    log << "check failed: rho " << rhos[a] << " vs " << rhos[b] << " differ by " << rel << '\n';
                }
                csv += g17(rhos[a]) + ',' + g17(rhos[b]) + ',' + g17(all) + ',' + g17(interior) + ',' + g17(rel) + '\n';
            }
        }
        write_text(out_dir / "rho_sweep.csv", csv);
        return ok ? exit_ok : exit_verification;
    });
}

std::vector<double> parse_rho_list(std::string_view text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        std::string item(text.substr(pos, comma - pos));
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
        if (item.empty() || used != item.size() || !std::isfinite(value)) {
            throw ConfigError("bad radius '" + item + "' in rho list");
        }
        out.push_back(value);
        pos = comma + 1;
    }
    return out;
}

}  // namespace balpot
