#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kerrwell/dynamics.hpp"
#include "kerrwell/hilbert.hpp"
#include "kerrwell/semiclassics.hpp"
#include "kerrwell/spectra.hpp"

namespace kerrwell {

constexpr const char* toolkit_version = "0.3.0";

enum class Task { spectrum, gap_trace, ilas, dynamics_T, steady_ratio, ebk, detailed_balance };

std::string task_name(Task t);
Task parse_task(const std::string& s);

// Sweep axis names: eps1, eps2, phi_deg for the KPO; k1, k2 for the chemical model.
struct AxisSpec {
    std::string name;
    double start = 0.0;
    double stop = 0.0;
    int count = 2;

    std::vector<double> values() const;
};

struct SolverSettings {
    int dim = 0;          // 0: truncation rule per point
    int n_keep = 12;
    double basis_freq = 0.0;
    std::string time_grid = "log";
    int time_points = 200;
    double t_max = 0.0;   // 0: ten spectral activation times
    std::string method = "spectral";  // dynamics_T: spectral or fit
    std::vector<std::pair<int, int>> pairs = {{4, 5}};
    int n_cff = 0;        // 0: default for the point's eps2
};

struct SweepSpec {
    std::string name = "sweep";
    ModelParams model;
    std::vector<AxisSpec> axes;
    Task task = Task::spectrum;
    SolverSettings solver;
    DissipationParams dissipation;
    std::string output_path;

    void validate() const;
    std::size_t rows() const;
};

SweepSpec sweep_spec_from_json(const nlohmann::json& j);
nlohmann::json sweep_spec_to_json(const SweepSpec& s);

struct SweepRow {
    std::vector<double> axis_values;
    std::vector<double> outputs;
    std::string method;  // dynamics rows only
    bool ok = true;
    std::string error;
    std::vector<std::string> warnings;
};

struct SweepResult {
    SweepSpec spec;
    std::vector<std::string> columns;
    std::vector<SweepRow> rows;
    double wall_seconds = 0.0;
    int workers = 1;
    nlohmann::json extra;  // preset manifest additions

    std::string csv() const;
    nlohmann::json manifest() const;
    // CSV to path and the manifest to path + ".json"
    void write(const std::string& path) const;
    std::size_t failed_rows() const;
    // index of a named output column within SweepRow::outputs, -1 if absent
    int output_index(const std::string& column) const;
};

// KERRWELL_WORKERS when set, else 1
int default_workers();

// output_path is checked for writability before any computation
SweepResult run_sweep(const SweepSpec& spec, int workers = 0);

// runs f(i) for i in [0, n) on a pool; results are collected by index
template <class F>
void parallel_for(std::size_t n, int workers, F&& f);

// one activation-time evaluation as used by sweeps and the optimizer
DecayFit dynamics_point(const ModelParams& p, const SolverSettings& solver, const DissipationParams& d);

struct OptimalAsymmetryPoint {
    double eps2 = 0.0;
    double eps1_star = 0.0;
    double T_star = 0.0;
    double T_symmetric = 0.0;
    bool ok = true;
    std::string error;
};

struct OptimalAsymmetryCurve {
    std::vector<OptimalAsymmetryPoint> points;
};

struct OptimalAsymmetryOptions {
    double step = 0.05;
    double tol = 1e-3;
    int workers = 0;
    SolverSettings solver;
    ModelParams base = ModelParams::kpo(0.0, 0.0);
};

// maximizes T over the drive (eps1, or k1 for a chemical base) at each depth value (eps2, or k2)
OptimalAsymmetryCurve optimal_asymmetry(const std::vector<double>& eps2_values, std::pair<double, double> eps1_range,
                                        const DissipationParams& d, const OptimalAsymmetryOptions& opt = {});

const std::vector<std::string>& figure_names();
// spec of a sweep-backed preset; fine scales the grid counts
SweepSpec preset_spec(const std::string& name, double fine = 1.0);
nlohmann::json preset_checks(const std::string& name);

struct ReproduceOptions {
    double fine = 1.0;
    int workers = 0;
    std::string out_dir = ".";
};

SweepResult reproduce_figure(const std::string& name, const ReproduceOptions& opt = {});

} // namespace kerrwell

#include "kerrwell/detail/parallel.hpp"
