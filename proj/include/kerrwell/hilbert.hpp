#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kerrwell/errors.hpp"

namespace kerrwell {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

enum class ModelFamily { kpo, chemical };

std::string family_name(ModelFamily f);
ModelFamily parse_family(const std::string& s);

// KPO values are in units of K, chemical ones in units of k4.
struct ModelParams {
    ModelFamily family = ModelFamily::kpo;
    double eps1 = 0.0;
    double eps2 = 0.0;
    double phi = 0.0;
    double k1 = 0.0;
    double k2 = 0.0;
    double input_rescale = 1.0;

    static ModelParams kpo(double eps1, double eps2, double phi = 0.0);
    static ModelParams chemical(double k1, double k2);

    // drive amplitudes after the ingest rescale
    double drive1() const { return eps1 * input_rescale; }
    double drive2() const { return eps2 * input_rescale; }

    void validate() const;
};

// Quasi-energies of the KPO are eigenvalues of -H so that the wells are minima.
enum class EnergySign { natural, inverted };

struct HermitianOperator {
    CMat m;
    EnergySign sign = EnergySign::natural;
    std::optional<ModelParams> params;
    double basis_freq = 1.0;
    std::vector<std::string> warnings;

    int dim() const { return static_cast<int>(m.rows()); }

    // throws ConsistencyError when m is not Hermitian to 1e-12 relative
    static HermitianOperator from_matrix(CMat m, EnergySign sign = EnergySign::natural);
    void check_hermitian() const;
};

struct StateVector {
    CVec v;
    int dim() const { return static_cast<int>(v.size()); }
    void validate() const;
};

struct DensityMatrix {
    CMat m;
    int dim() const { return static_cast<int>(m.rows()); }
    void validate() const;
    static DensityMatrix pure(const StateVector& s);
};

struct PhysicalDriveParams {
    double g3 = 0.0;
    double g4 = 0.0;
    double omega_a = 0.0;
    double Omega1 = 0.0;
    double Omega2 = 0.0;
};

struct ConvertedParams {
    double K;
    double eps1;
    double eps2;
    double eps1_over_K;
    double eps2_over_K;
};

CMat annihilation_operator(int dim);
CMat creation_operator(int dim);
CMat number_operator(int dim);
CMat parity_operator(int dim);
// basis_freq rescales the quadratures for the chemical harmonic basis
CMat position_operator(int dim, double basis_freq = 1.0);
CMat momentum_operator(int dim, double basis_freq = 1.0);

int default_kpo_dim(double eps2);
constexpr int default_chemical_dim = 120;
double default_basis_freq(double k2);
// picks the family default when dim <= 0
int resolve_dim(const ModelParams& p, int dim);

HermitianOperator build_kpo_hamiltonian(const ModelParams& p, int dim);
HermitianOperator build_chemical_hamiltonian(const ModelParams& p, int dim, double basis_freq,
                                             bool check_convergence = true);
// dispatch on family; dim <= 0 and basis_freq <= 0 select defaults
HermitianOperator build_hamiltonian(const ModelParams& p, int dim = 0, double basis_freq = 0.0);

// lowering operator of the mode the dissipation acts on
CMat dissipation_mode(const HermitianOperator& H);

StateVector coherent_state(cplx alpha, int dim);
// coherent state centred at the classical point (x, p) of the operator's basis
StateVector coherent_state_at(double x, double p, int dim, double basis_freq = 1.0);

ConvertedParams convert_physical_params(const PhysicalDriveParams& p);

} // namespace kerrwell
