#pragma once

#include <complex>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "kerrwell/hilbert.hpp"
#include "kerrwell/spectra.hpp"

namespace kerrwell {

using SpMat = Eigen::SparseMatrix<cplx>;

struct DissipationParams {
    double kappa = 0.025;
    double n_th = 0.05;
    void validate() const;
};

// Column-stacked vec(rho); kept sparse since the generator is banded in Fock space.
struct Superoperator {
    SpMat L;
    int dim = 0;
    HermitianOperator H;
    DissipationParams dissipation;
    CMat lowering;
    double trace_residual = 0.0;
};

Superoperator liouvillian(const HermitianOperator& H, const DissipationParams& d);

// right-hand side of the master equation applied to a matrix
CMat apply_liouvillian(const Superoperator& L, const CMat& rho);

struct WellProjectors {
    CMat right;  // positive position eigenvalues
    CMat left;
};

WellProjectors well_projectors(int dim);

struct WellSides {
    CMat shallow;
    CMat deep;
    // classical shallow minimum, used for the initial coherent state
    double x_shallow = 0.0;
    double p_shallow = 0.0;
    bool shallow_is_left = true;
};

// side assignment from the classical landscape of the operator's parameters;
// without parameters (or without two minima) the left side is called shallow
WellSides well_sides(const HermitianOperator& H);

// coherent state at the classical shallow minimum
DensityMatrix shallow_initial_state(const HermitianOperator& H);

struct Trajectory {
    std::vector<double> times;
    std::vector<double> shallow_population;
    std::vector<double> deep_population;
    std::vector<double> trace_error;
    std::vector<double> hermiticity_error;
    std::vector<double> min_eigenvalue;
    std::vector<std::string> warnings;
};

// Exact propagator from a real eigendecomposition of the generator written in an
// orthonormal Hermitian operator basis.
class Propagator {
public:
    explicit Propagator(const Superoperator& L);
    ~Propagator();
    Propagator(Propagator&&) noexcept;
    Propagator& operator=(Propagator&&) noexcept;

    int dim() const;
    // eigenvalues of the generator, the one closest to zero pinned at zero
    const Eigen::VectorXcd& eigenvalues() const;
    double eigenvector_condition_estimate() const;

    void set_initial(const DensityMatrix& rho0);
    DensityMatrix state_at(double t) const;
    // relative mismatch of the eigen-expansion of the initial state
    double reconstruction_error() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

constexpr int max_dense_propagation_dim = 70;

Trajectory evolve(const DensityMatrix& rho0, const Superoperator& L, const std::vector<double>& times);
Trajectory evolve(const DensityMatrix& rho0, const Superoperator& L, const std::vector<double>& times,
                  const WellSides& sides);

// t = 0 followed by (points - 1) log-spaced times from 1e-2 to t_max
std::vector<double> log_time_grid(double t_max, int points = 200);

struct SteadyState {
    DensityMatrix rho;
    double min_eigenvalue_before_clip = 0.0;
    double residual = 0.0;
    std::vector<std::string> warnings;
};

DensityMatrix steady_state(const Superoperator& L);
SteadyState steady_state_detail(const Superoperator& L);

enum class DecayMethod { fit, spectral };
std::string method_name(DecayMethod m);

enum class Sector { population, coherence, mixed };
std::string sector_name(Sector s);

struct SlowMode {
    cplx lambda;
    double rate = 0.0;  // |Re lambda|
    double imbalance_overlap = 0.0;
    double population_weight = 0.0;  // diagonal fraction of the eigenmatrix
    Sector sector = Sector::mixed;
    bool selected = false;
};

struct DecayFit {
    double T = 0.0;
    double O = 0.0;
    double rmse = 0.0;
    DecayMethod method = DecayMethod::fit;
    std::vector<SlowMode> modes;
    std::vector<std::string> warnings;

    double sector_rate(Sector s) const;
};

DecayFit activation_time_fit(const Trajectory& traj);

struct SpectralOptions {
    int modes = 4;
    double shift = 1e-9;
    int krylov_max = 60;
    int restarts = 20;
    double tol = 1e-10;
};

DecayFit activation_time_spectral(const Superoperator& L, const SpectralOptions& opt = {});

struct DetailedBalanceReport {
    std::vector<double> beta_values;
    std::vector<std::pair<int, int>> pairs;
    std::vector<double> populations;  // eigen-populations matched to the spectrum levels
    double beta_avg = 0.0;
    double beta_std = 0.0;
    double trace_distance = 0.0;
};

DetailedBalanceReport detailed_balance_analysis(const DensityMatrix& rho_ss, const Spectrum& spec,
                                                double threshold = 1e-6);

double trace_distance(const CMat& a, const CMat& b);

} // namespace kerrwell
