#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "kerrwell/orchestrator.hpp"

using namespace kerrwell;
using nlohmann::json;

namespace {

constexpr double deg = 3.14159265358979323846 / 180.0;

struct Common {
    std::string model = "kpo";
    double eps1 = 0.0;
    double eps2 = 0.0;
    double phi_deg = 0.0;
    double k1 = 0.0;
    double k2 = 0.0;
    double rescale = 1.0;
    double kappa = 0.025;
    double nth = 0.05;
    int dim = 0;
    double tmax = 0.0;
    std::string out;
    int workers = 0;

    ModelParams params() const
    {
        ModelParams p;
        p.family = parse_family(model);
        p.eps1 = eps1;
        p.eps2 = eps2;
        p.phi = phi_deg * deg;
        p.k1 = k1;
        p.k2 = k2;
        p.input_rescale = rescale;
        p.validate();
        return p;
    }

    DissipationParams dissipation() const
    {
        DissipationParams d{kappa, nth};
        d.validate();
        return d;
    }

    int worker_count() const { return workers > 0 ? workers : default_workers(); }
};

void add_common(CLI::App* app, Common& c)
{
    app->add_option("--model", c.model, "kpo or chemical")->check(CLI::IsMember({"kpo", "chemical"}));
    app->add_option("--eps1", c.eps1, "linear drive eps1/K");
    app->add_option("--eps2", c.eps2, "squeezing drive eps2/K");
    app->add_option("--phi-deg", c.phi_deg, "linear drive phase in degrees");
    app->add_option("--k1", c.k1, "chemical k1/k4");
    app->add_option("--k2", c.k2, "chemical k2/k4");
    app->add_option("--rescale", c.rescale, "multiplier applied to the drive amplitudes");
    app->add_option("--kappa", c.kappa, "loss rate kappa/K");
    app->add_option("--nth", c.nth, "thermal occupation");
    app->add_option("--dim", c.dim, "Fock truncation (0: default rule)");
    app->add_option("--tmax", c.tmax, "trajectory end time (0: ten activation times)");
    app->add_option("--out", c.out, "output file (stdout when omitted)");
    app->add_option("--workers", c.workers, "worker threads (default KERRWELL_WORKERS or 1)");
}

void emit(const Common& c, const std::string& text)
{
    if (c.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(c.out, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + c.out);
    f << text;
}

std::string num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::vector<std::pair<int, int>> parse_pairs(const std::vector<std::string>& items)
{
    std::vector<std::pair<int, int>> pairs;
    for (const std::string& s : items) {
        int a = 0;
        int b = 0;
        char sep = 0;
        std::istringstream in(s);
        if (!(in >> a >> sep >> b) || sep != ',' || !in.eof()) throw UsageError("pair must look like 4,5: " + s);
        pairs.emplace_back(a, b);
    }
    return pairs;
}

int run(int argc, char** argv)
{
    CLI::App app{"Kerr double-well toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", toolkit_version);
    Common c;

    int n_keep = 12;
    auto* spectrum = app.add_subcommand("spectrum", "quasi-energies and transition energies");
    add_common(spectrum, c);
    spectrum->add_option("--n-keep", n_keep, "levels to report");

    std::string axis = "eps1";
    double start = 0.0;
    double stop = 1.0;
    int count = 11;
    std::vector<std::string> pair_text{"4,5"};
    auto* gaps = app.add_subcommand("gaps", "tracked level gaps along one parameter");
    add_common(gaps, c);
    gaps->add_option("--axis", axis, "eps1, eps2, phi, k1 or k2");
    gaps->add_option("--start", start);
    gaps->add_option("--stop", stop);
    gaps->add_option("--count", count);
    gaps->add_option("--pair", pair_text, "level pair a,b (repeatable)");

    int n_cff = 0;
    auto* ilas_cmd = app.add_subcommand("ilas", "inverse logarithmic anti-cross sum");
    add_common(ilas_cmd, c);
    ilas_cmd->add_option("--n-cff", n_cff, "number of gaps (0: default)");

    std::string method = "spectral";
    int points = 200;
    auto* dynamics = app.add_subcommand("dynamics", "activation time out of the shallow well");
    add_common(dynamics, c);
    dynamics->add_option("--method", method, "spectral or fit")->check(CLI::IsMember({"spectral", "fit"}));
    dynamics->add_option("--points", points, "time samples for the fit method");

    auto* steady = app.add_subcommand("steady", "steady-state well populations");
    add_common(steady, c);

    auto* ebk = app.add_subcommand("ebk", "classical landscape and lobe actions");
    add_common(ebk, c);

    int n_max = 4;
    int m_max = 10;
    double lo = 1.0;
    double hi = 16.0;
    auto* inter = app.add_subcommand("intersections", "points where shallow, deep and resonance curves meet");
    add_common(inter, c);
    inter->add_option("--n-max", n_max);
    inter->add_option("--m-max", m_max);
    inter->add_option("--lo", lo, "lower eps2/K");
    inter->add_option("--hi", hi, "upper eps2/K");

    std::string config;
    auto* sweep = app.add_subcommand("sweep", "run a JSON sweep description");
    add_common(sweep, c);
    sweep->add_option("--config", config, "sweep JSON file")->required();

    std::vector<double> depth_values;
    double range_lo = 0.0;
    double range_hi = 1.8;
    auto* optimal = app.add_subcommand("optimal-asymmetry", "drive maximizing the activation time per depth");
    add_common(optimal, c);
    optimal->add_option("--eps2-values", depth_values, "depth values (eps2/K, or k2/k4 for chemical)")->required()->delimiter(',');
    optimal->add_option("--range-lo", range_lo);
    optimal->add_option("--range-hi", range_hi);
    optimal->add_option("--method", method, "spectral or fit")->check(CLI::IsMember({"spectral", "fit"}));

    std::string figure;
    double fine = 1.0;
    auto* reproduce = app.add_subcommand("reproduce", "canned figure sweep");
    add_common(reproduce, c);
    reproduce->add_option("figure", figure, "figure name")->required();
    reproduce->add_option("--fine", fine, "grid resolution multiplier");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (spectrum->parsed()) {
        HermitianOperator H = build_hamiltonian(c.params(), c.dim);
        Spectrum s = eigensystem(H, n_keep);
        Eigen::VectorXd tr = transition_spectrum(s);
        std::string text = "n,energy,transition\n";
        for (int k = 0; k < s.size(); ++k) text += std::to_string(k) + "," + num(s.energies(k)) + "," + num(tr(k)) + "\n";
        for (const std::string& w : H.warnings) std::cerr << "warning: " << w << "\n";
        emit(c, text);
    } else if (gaps->parsed()) {
        if (count < 2) throw UsageError("--count must be at least 2");
        std::vector<double> values(count);
        for (int k = 0; k < count; ++k) values[k] = start + (stop - start) * k / (count - 1);
        const Axis ax = parse_axis(axis);
        GapTrace g = gap_trace(c.params(), ax, values, parse_pairs(pair_text), {c.dim, 0, 0.0});
        std::string text = axis_name(ax);
        for (const auto& [a, b] : g.pairs) text += ",gap_" + std::to_string(a) + "_" + std::to_string(b);
        text += ",tracking_lost\n";
        for (std::size_t k = 0; k < values.size(); ++k) {
            text += num(values[k]);
            for (const auto& gp : g.gaps) text += "," + num(gp[k]);
            text += g.tracking_lost(k) ? ",1\n" : ",0\n";
        }
        emit(c, text);
    } else if (ilas_cmd->parsed()) {
        ModelParams p = c.params();
        const int n = n_cff > 0 ? n_cff : default_n_cff(p.family == ModelFamily::kpo ? p.drive2() : p.k2);
        Spectrum s = eigensystem(build_hamiltonian(p, c.dim), n + 1);
        emit(c, "ilas,n_cff\n" + num(ilas(s, n)) + "," + std::to_string(n) + "\n");
    } else if (dynamics->parsed()) {
        ModelParams p = c.params();
        SolverSettings solver;
        solver.dim = resolve_dim(p, c.dim);
        solver.method = method;
        solver.t_max = c.tmax;
        solver.time_points = points;
        DecayFit fit = dynamics_point(p, solver, c.dissipation());
        for (const std::string& w : fit.warnings) std::cerr << "warning: " << w << "\n";
        json out{{"T", fit.T}, {"offset", fit.O}, {"method", method_name(fit.method)}, {"dim", solver.dim}};
        if (std::isfinite(fit.rmse)) out["fit_rmse"] = fit.rmse;
        json modes = json::array();
        for (const SlowMode& m : fit.modes)
            modes.push_back({{"re", m.lambda.real()},
                             {"im", m.lambda.imag()},
                             {"sector", sector_name(m.sector)},
                             {"imbalance_overlap", m.imbalance_overlap},
                             {"selected", m.selected}});
        out["modes"] = modes;
        emit(c, out.dump(2) + "\n");
    } else if (steady->parsed()) {
        HermitianOperator H = build_hamiltonian(c.params(), c.dim);
        SteadyState ss = steady_state_detail(liouvillian(H, c.dissipation()));
        WellSides sides = well_sides(H);
        const double ps = (sides.shallow * ss.rho.m).trace().real();
        const double pd = (sides.deep * ss.rho.m).trace().real();
        for (const std::string& w : ss.warnings) std::cerr << "warning: " << w << "\n";
        emit(c, "p_shallow,p_deep,ratio\n" + num(ps) + "," + num(pd) + "," + num(ps / pd) + "\n");
    } else if (ebk->parsed()) {
        ModelParams p = c.params();
        ClassicalLandscape land = analyze_landscape(p);
        const double as = lobe_action(p, Well::shallow);
        const double ad = lobe_action(p, Well::deep);
        json out{{"shallow", {{"x", land.shallow.x}, {"p", land.shallow.p}, {"q", land.shallow.q}}},
                 {"deep", {{"x", land.deep.x}, {"p", land.deep.p}, {"q", land.deep.q}}},
                 {"saddle", {{"x", land.saddle.x}, {"p", land.saddle.p}, {"q", land.saddle.q}}},
                 {"asymmetry_A", land.asymmetry_A},
                 {"barrier_shallow", land.barrier_shallow},
                 {"barrier_deep", land.barrier_deep},
                 {"action_shallow", as},
                 {"action_deep", ad},
                 {"orbits_shallow", ebk_orbit_count(as)},
                 {"orbits_deep", ebk_orbit_count(ad)}};
        emit(c, out.dump(2) + "\n");
    } else if (inter->parsed()) {
        std::string text = "n,m,eps1_over_K,eps2_over_K,deep_offset\n";
        for (const TripleIntersection& t : triple_intersections(n_max, m_max, lo, hi))
            text += std::to_string(t.n) + "," + std::to_string(t.m) + "," + num(t.eps1) + "," + num(t.eps2) + "," +
                    num(t.deep_offset) + "\n";
        emit(c, text);
    } else if (sweep->parsed()) {
        std::ifstream f(config);
        if (!f) throw IoError("cannot read " + config);
        json j;
        try {
            j = json::parse(f);
        } catch (const json::exception& e) {
            throw UsageError(std::string("invalid JSON: ") + e.what());
        }
        SweepSpec spec = sweep_spec_from_json(j);
        if (!c.out.empty()) spec.output_path = c.out;
        SweepResult res = run_sweep(spec, c.worker_count());
        if (spec.output_path.empty()) std::cout << res.csv();
        std::cerr << res.rows.size() << " rows, " << res.failed_rows() << " failed, " << res.wall_seconds << " s\n";
    } else if (optimal->parsed()) {
        OptimalAsymmetryOptions o;
        o.workers = c.worker_count();
        o.base = c.params();
        o.solver.dim = c.dim;
        o.solver.method = method;
        o.solver.t_max = c.tmax;
        OptimalAsymmetryCurve curve = optimal_asymmetry(depth_values, {range_lo, range_hi}, c.dissipation(), o);
        std::string text = "eps2,eps1_star,T_star,T_symmetric,status\n";
        for (const OptimalAsymmetryPoint& p : curve.points)
            text += num(p.eps2) + "," + num(p.eps1_star) + "," + num(p.T_star) + "," + num(p.T_symmetric) + "," +
                    (p.ok ? "ok" : "failed") + "\n";
        emit(c, text);
    } else if (reproduce->parsed()) {
        ReproduceOptions o;
        o.fine = fine;
        o.workers = c.worker_count();
        o.out_dir = c.out.empty() ? "." : c.out;
        SweepResult res = reproduce_figure(figure, o);
        std::cerr << figure << ": " << res.rows.size() << " rows, " << res.failed_rows() << " failed, "
                  << res.wall_seconds << " s\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    try {
        return run(argc, argv);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
