#include "kerrwell/orchestrator.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <unistd.h>

namespace kerrwell {

using nlohmann::json;

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();
constexpr double deg = 3.14159265358979323846 / 180.0;

Axis axis_of(const std::string& name)
{
    return name == "phi_deg" ? Axis::phi : parse_axis(name);
}

double axis_scale(const std::string& name)
{
    return name == "phi_deg" ? deg : 1.0;
}

std::vector<std::string> param_columns(ModelFamily f)
{
    if (f == ModelFamily::kpo) return {"eps1_over_K", "eps2_over_K", "phi_deg"};
    return {"k1_over_k4", "k2_over_k4"};
}

std::vector<double> param_values(const ModelParams& p)
{
    if (p.family == ModelFamily::kpo) return {p.eps1, p.eps2, p.phi / deg};
    return {p.k1, p.k2};
}

std::vector<std::string> task_columns(const SweepSpec& s)
{
    switch (s.task) {
    case Task::spectrum: {
        std::vector<std::string> c;
        for (int k = 1; k < s.solver.n_keep; ++k) c.push_back("transition_" + std::to_string(k));
        return c;
    }
    case Task::gap_trace: {
        std::vector<std::string> c;
        for (const auto& [a, b] : s.solver.pairs) c.push_back("gap_" + std::to_string(a) + "_" + std::to_string(b));
        c.push_back("tracking_lost");
        return c;
    }
    case Task::ilas: return {"ilas", "n_cff"};
    case Task::steady_ratio: return {"p_shallow", "p_deep", "ratio"};
    case Task::ebk:
        return {"action_shallow", "action_deep", "orbits_shallow", "orbits_deep",
                "asymmetry_A",    "barrier_shallow", "barrier_deep"};
    case Task::detailed_balance: return {"beta_avg", "beta_std", "trace_distance", "n_pairs"};
    default: return {};
    }
}

ModelParams point_params(const SweepSpec& s, const std::vector<double>& axis_values)
{
    ModelParams p = s.model;
    for (std::size_t k = 0; k < s.axes.size(); ++k)
        p = with_axis(p, axis_of(s.axes[k].name), axis_values[k] * axis_scale(s.axes[k].name));
    return p;
}

std::vector<double> axis_point(const SweepSpec& s, std::size_t index)
{
    std::vector<double> v(s.axes.size());
    for (std::size_t k = s.axes.size(); k-- > 0;) {
        const std::size_t c = static_cast<std::size_t>(s.axes[k].count);
        v[k] = s.axes[k].values()[index % c];
        index /= c;
    }
    return v;
}

void append(std::vector<std::string>& to, const std::vector<std::string>& from)
{
    to.insert(to.end(), from.begin(), from.end());
}

// evaluates one non-dynamics task; outputs exclude the parameter and dim columns
std::vector<double> evaluate(const SweepSpec& s, const ModelParams& p, int dim, std::vector<std::string>& warnings)
{
    switch (s.task) {
    case Task::spectrum: {
        HermitianOperator H = build_hamiltonian(p, dim, s.solver.basis_freq);
        append(warnings, H.warnings);
        Spectrum sp = eigensystem(H, s.solver.n_keep);
        append(warnings, sp.warnings);
        Eigen::VectorXd tr = transition_spectrum(sp);
        return std::vector<double>(tr.data() + 1, tr.data() + tr.size());
    }
    case Task::ilas: {
        const int n_cff = s.solver.n_cff > 0 ? s.solver.n_cff : default_n_cff(p.family == ModelFamily::kpo ? p.drive2() : p.k2);
        HermitianOperator H = build_hamiltonian(p, dim, s.solver.basis_freq);
        append(warnings, H.warnings);
        Spectrum sp = eigensystem(H, n_cff + 1);
        append(warnings, sp.warnings);
        return {ilas(sp, n_cff), static_cast<double>(n_cff)};
    }
    case Task::steady_ratio: {
        HermitianOperator H = build_hamiltonian(p, dim, s.solver.basis_freq);
        append(warnings, H.warnings);
        Superoperator L = liouvillian(H, s.dissipation);
        SteadyState ss = steady_state_detail(L);
        append(warnings, ss.warnings);
        WellSides sides = well_sides(H);
        const double ps = (sides.shallow * ss.rho.m).trace().real();
        const double pd = (sides.deep * ss.rho.m).trace().real();
        return {ps, pd, ps / pd};
    }
    case Task::ebk: {
        ClassicalLandscape land = analyze_landscape(p);
        const double as = lobe_action(p, Well::shallow);
        const double ad = lobe_action(p, Well::deep);
        return {as,
                ad,
                static_cast<double>(ebk_orbit_count(as)),
                static_cast<double>(ebk_orbit_count(ad)),
                land.asymmetry_A,
                land.barrier_shallow,
                land.barrier_deep};
    }
    case Task::detailed_balance: {
        HermitianOperator H = build_hamiltonian(p, dim, s.solver.basis_freq);
        append(warnings, H.warnings);
        Spectrum sp = eigensystem(H);
        SteadyState ss = steady_state_detail(liouvillian(H, s.dissipation));
        append(warnings, ss.warnings);
        DetailedBalanceReport rep = detailed_balance_analysis(ss.rho, sp);
        return {rep.beta_avg, rep.beta_std, rep.trace_distance, static_cast<double>(rep.pairs.size())};
    }
    default: throw InvalidArgument("task handled elsewhere");
    }
}

void check_writable(const std::string& path)
{
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path dir = target.parent_path();
    if (dir.empty()) dir = ".";
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw IoError("output directory does not exist: " + dir.string());
    if (fs::is_directory(target, ec)) throw IoError("output path is a directory: " + path);
    for (const fs::path& f : {target, fs::path(path + ".json")}) {
        if (fs::exists(f, ec) ? ::access(f.c_str(), W_OK) != 0 : ::access(dir.c_str(), W_OK) != 0)
            throw IoError("output path is not writable: " + f.string());
    }
}

std::string format_number(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

} // namespace

DecayFit dynamics_point(const ModelParams& p, const SolverSettings& solver, const DissipationParams& d)
{
    HermitianOperator H = build_hamiltonian(p, solver.dim, solver.basis_freq);
    Superoperator L = liouvillian(H, d);
    DecayFit spectral = activation_time_spectral(L);
    spectral.warnings.insert(spectral.warnings.begin(), H.warnings.begin(), H.warnings.end());
    if (solver.method == "spectral") return spectral;

    const double t_max = solver.t_max > 0.0 ? solver.t_max : 10.0 * spectral.T;
    WellSides sides = well_sides(H);
    DensityMatrix rho0 = DensityMatrix::pure(coherent_state_at(sides.x_shallow, sides.p_shallow, H.dim(), H.basis_freq));
    Trajectory traj = evolve(rho0, L, log_time_grid(t_max, solver.time_points), sides);
    DecayFit fit = activation_time_fit(traj);
    fit.modes = spectral.modes;
    fit.warnings.insert(fit.warnings.begin(), traj.warnings.begin(), traj.warnings.end());
    fit.warnings.insert(fit.warnings.begin(), H.warnings.begin(), H.warnings.end());
    return fit;
}

SweepResult run_sweep(const SweepSpec& spec, int workers)
{
    spec.validate();
    if (!spec.output_path.empty()) check_writable(spec.output_path);
    if (workers <= 0) workers = default_workers();
    const auto start = std::chrono::steady_clock::now();

    SweepResult res;
    res.spec = spec;
    res.workers = workers;
    const bool chemical = spec.model.family == ModelFamily::chemical;
    if (spec.task == Task::dynamics_T) {
        res.columns = {chemical ? "k1_over_k4" : "eps1_over_K",
                       chemical ? "k2_over_k4" : "eps2_over_K",
                       "phi_deg",
                       "kappa_over_K",
                       "n_th",
                       "dim",
                       "T_K",
                       "offset",
                       "fit_rmse",
                       "method"};
    } else {
        res.columns = param_columns(spec.model.family);
        res.columns.push_back("dim");
        append(res.columns, task_columns(spec));
        res.columns.push_back("status");
    }
    const std::size_t n_numeric = res.columns.size() - 1;

    const std::size_t n = spec.rows();
    res.rows.resize(n);
    for (std::size_t i = 0; i < n; ++i) res.rows[i].axis_values = axis_point(spec, i);

    auto leading = [&](const ModelParams& p, int dim) {
        std::vector<double> out;
        if (spec.task == Task::dynamics_T) {
            const double a = chemical ? p.k1 : p.eps1;
            const double b = chemical ? p.k2 : p.eps2;
            out = {a, b, chemical ? 0.0 : p.phi / deg, spec.dissipation.kappa, spec.dissipation.n_th};
        } else {
            out = param_values(p);
        }
        out.push_back(static_cast<double>(dim));
        return out;
    };

    auto fail = [&](SweepRow& row, const ModelParams& p, int dim, const std::string& what) {
        row.ok = false;
        row.error = what;
        row.method = "failed";
        row.outputs = leading(p, dim);
        row.outputs.resize(n_numeric, nan);
    };

    if (spec.task == Task::gap_trace) {
        // levels are followed along the innermost axis, one line per outer value
        const AxisSpec& inner = spec.axes.back();
        const std::size_t lines = n / static_cast<std::size_t>(inner.count);
        const std::vector<double> inner_values = inner.values();
        std::vector<double> scaled(inner_values);
        for (double& v : scaled) v *= axis_scale(inner.name);
        parallel_for(lines, workers, [&](std::size_t line) {
            const std::size_t first = line * static_cast<std::size_t>(inner.count);
            ModelParams base = point_params(spec, res.rows[first].axis_values);
            GapTraceOptions opt{spec.solver.dim, 0, spec.solver.basis_freq};
            try {
                GapTrace g = gap_trace(base, axis_of(inner.name), scaled, spec.solver.pairs, opt);
                for (int k = 0; k < inner.count; ++k) {
                    SweepRow& row = res.rows[first + k];
                    row.outputs = leading(point_params(spec, row.axis_values), g.dim);
                    for (const auto& gp : g.gaps) row.outputs.push_back(gp[k]);
                    row.outputs.push_back(g.tracking_lost(k) ? 1.0 : 0.0);
                    row.warnings = g.warnings[k];
                    row.method = "ok";
                }
            } catch (const std::exception& e) {
                for (int k = 0; k < inner.count; ++k) {
                    SweepRow& row = res.rows[first + k];
                    const ModelParams p = point_params(spec, row.axis_values);
                    int dim = 0;
                    try {
                        dim = resolve_dim(p, spec.solver.dim);
                    } catch (const std::exception&) {
                    }
                    fail(row, p, dim, e.what());
                }
            }
        });
    } else {
        parallel_for(n, workers, [&](std::size_t i) {
            SweepRow& row = res.rows[i];
            ModelParams p = point_params(spec, row.axis_values);
            int dim = 0;
            try {
                dim = resolve_dim(p, spec.solver.dim);
                if (spec.task == Task::ebk) dim = 0;
                if (spec.task == Task::dynamics_T) {
                    SolverSettings solver = spec.solver;
                    solver.dim = dim;
                    DecayFit fit = dynamics_point(p, solver, spec.dissipation);
                    row.outputs = leading(p, dim);
                    row.outputs.insert(row.outputs.end(), {fit.T, fit.O, fit.rmse});
                    row.method = method_name(fit.method);
                    row.warnings = fit.warnings;
                } else {
                    row.outputs = leading(p, dim);
                    std::vector<double> out = evaluate(spec, p, dim, row.warnings);
                    out.resize(n_numeric - row.outputs.size(), nan);
                    row.outputs.insert(row.outputs.end(), out.begin(), out.end());
                    row.method = "ok";
                }
            } catch (const std::exception& e) {
                fail(row, p, dim, e.what());
            }
        });
    }

    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!spec.output_path.empty()) res.write(spec.output_path);
    return res;
}

std::string SweepResult::csv() const
{
    std::string out;
    for (std::size_t k = 0; k < columns.size(); ++k) {
        if (k) out += ',';
        out += columns[k];
    }
    out += '\n';
    for (const SweepRow& row : rows) {
        for (double v : row.outputs) {
            out += format_number(v);
            out += ',';
        }
        out += row.method;
        out += '\n';
    }
    return out;
}

json SweepResult::manifest() const
{
    json failures = json::array();
    json warned = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].ok) failures.push_back({{"row", i}, {"axis_values", rows[i].axis_values}, {"error", rows[i].error}});
        if (!rows[i].warnings.empty()) warned.push_back({{"row", i}, {"warnings", rows[i].warnings}});
    }
    json m{{"toolkit_version", toolkit_version},
           {"spec", sweep_spec_to_json(spec)},
           {"columns", columns},
           {"rows", rows.size()},
           {"wall_seconds", wall_seconds},
           {"workers", workers},
           {"failed_rows", failures},
           {"row_warnings", warned}};
    if (!extra.is_null()) m.update(extra);
    return m;
}

void SweepResult::write(const std::string& path) const
{
    check_writable(path);
    std::ofstream csv_out(path, std::ios::binary | std::ios::trunc);
    csv_out << csv();
    std::ofstream json_out(path + ".json", std::ios::binary | std::ios::trunc);
    json_out << manifest().dump(2) << '\n';
    if (!csv_out || !json_out) throw IoError("failed writing " + path);
}

std::size_t SweepResult::failed_rows() const
{
    std::size_t n = 0;
    for (const SweepRow& r : rows) n += r.ok ? 0 : 1;
    return n;
}

int SweepResult::output_index(const std::string& column) const
{
    for (std::size_t k = 0; k + 1 < columns.size(); ++k)
        if (columns[k] == column) return static_cast<int>(k);
    return -1;
}

} // namespace kerrwell
