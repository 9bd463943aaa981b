#include "kerrwell/hilbert.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace kerrwell {

std::string family_name(ModelFamily f)
{
    return f == ModelFamily::kpo ? "kpo" : "chemical";
}

ModelFamily parse_family(const std::string& s)
{
    if (s == "kpo") return ModelFamily::kpo;
    if (s == "chemical") return ModelFamily::chemical;
    throw InvalidArgument("unknown model family '" + s + "' (expected kpo or chemical)");
}

ModelParams ModelParams::kpo(double eps1, double eps2, double phi)
{
    ModelParams p;
    p.family = ModelFamily::kpo;
    p.eps1 = eps1;
    p.eps2 = eps2;
    p.phi = phi;
    return p;
}

ModelParams ModelParams::chemical(double k1, double k2)
{
    ModelParams p;
    p.family = ModelFamily::chemical;
    p.k1 = k1;
    p.k2 = k2;
    return p;
}

void ModelParams::validate() const
{
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(eps1) || !finite(eps2) || !finite(phi) || !finite(k1) || !finite(k2))
        throw InvalidArgument("model parameters must be finite");
    if (eps2 < 0.0) throw InvalidArgument("eps2 must be non-negative");
    if (k2 < 0.0) throw InvalidArgument("k2 must be non-negative");
    if (!(input_rescale >= 0.8 && input_rescale <= 1.2))
        throw InvalidArgument("input_rescale must lie in [0.8, 1.2]");
}

HermitianOperator HermitianOperator::from_matrix(CMat m, EnergySign sign)
{
    HermitianOperator h;
    h.m = std::move(m);
    h.sign = sign;
    h.check_hermitian();
    return h;
}

void HermitianOperator::check_hermitian() const
{
    if (m.rows() != m.cols() || m.rows() < 1)
        throw InvalidDimension("operator must be square and non-empty");
    const double scale = m.cwiseAbs().maxCoeff();
    const double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (dev > 1e-12 * std::max(scale, 1e-300))
        throw ConsistencyError("operator is not Hermitian (deviation " + std::to_string(dev) + ")");
}

void StateVector::validate() const
{
    if (v.size() < 1) throw InvalidDimension("empty state vector");
    if (std::abs(v.norm() - 1.0) > 1e-10) throw ConsistencyError("state vector is not normalized");
}

void DensityMatrix::validate() const
{
    if (m.rows() != m.cols() || m.rows() < 1) throw InvalidDimension("density matrix must be square");
    if (std::abs(m.trace() - cplx(1.0)) > 1e-10) throw ConsistencyError("density matrix trace differs from 1");
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw ConsistencyError("density matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMat> es(m, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8) throw ConsistencyError("density matrix is not positive");
}

DensityMatrix DensityMatrix::pure(const StateVector& s)
{
    DensityMatrix r;
    r.m = s.v * s.v.adjoint();
    return r;
}

static void require_dim(int dim)
{
    if (dim < 2) throw InvalidDimension("dimension must be at least 2, got " + std::to_string(dim));
}

CMat annihilation_operator(int dim)
{
    require_dim(dim);
    CMat a = CMat::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

CMat creation_operator(int dim)
{
    return annihilation_operator(dim).adjoint();
}

CMat number_operator(int dim)
{
    require_dim(dim);
    CMat n = CMat::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
    return n;
}

CMat parity_operator(int dim)
{
    require_dim(dim);
    CMat p = CMat::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) p(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
    return p;
}

CMat position_operator(int dim, double basis_freq)
{
    if (!(basis_freq > 0.0)) throw InvalidArgument("basis frequency must be positive");
    CMat a = annihilation_operator(dim);
    return (a + a.adjoint()) / std::sqrt(2.0 * basis_freq);
}

CMat momentum_operator(int dim, double basis_freq)
{
    if (!(basis_freq > 0.0)) throw InvalidArgument("basis frequency must be positive");
    CMat a = annihilation_operator(dim);
    return cplx(0.0, std::sqrt(basis_freq / 2.0)) * (a.adjoint() - a);
}

int default_kpo_dim(double eps2)
{
    eps2 = std::max(eps2, 0.0);
    const double rule = std::ceil(4.0 * eps2 + 6.0 * std::sqrt(eps2) + 20.0);
    return std::max(60, static_cast<int>(rule));
}

double default_basis_freq(double k2)
{
    // 2 sqrt(k2) degenerates for a nearly flat bottom; fall back to unit frequency
    return k2 >= 0.25 ? 2.0 * std::sqrt(k2) : 1.0;
}

int resolve_dim(const ModelParams& p, int dim)
{
    if (dim > 0) return dim;
    return p.family == ModelFamily::kpo ? default_kpo_dim(p.drive2()) : default_chemical_dim;
}

HermitianOperator build_kpo_hamiltonian(const ModelParams& p, int dim)
{
    if (p.family != ModelFamily::kpo) throw InvalidArgument("KPO builder needs a KPO parameter set");
    p.validate();
    require_dim(dim);
    const double e1 = p.drive1();
    const double e2 = p.drive2();

    CMat a = annihilation_operator(dim);
    CMat ad = a.adjoint();
    CMat a2 = a * a;
    CMat ad2 = a2.adjoint();
    CMat H = -(ad2 * a2) + e2 * (a2 + ad2);
    const cplx ph = std::polar(1.0, p.phi);
    H += e1 * (ph * a + std::conj(ph) * ad);
    H = 0.5 * (H + H.adjoint()).eval();

    HermitianOperator out = HermitianOperator::from_matrix(std::move(H), EnergySign::inverted);
    out.params = p;
    out.basis_freq = 1.0;
    if (dim < default_kpo_dim(e2))
        out.warnings.push_back("dimension " + std::to_string(dim) + " below the truncation rule " +
                               std::to_string(default_kpo_dim(e2)));
    return out;
}

static CMat chemical_matrix(const ModelParams& p, int dim, double w)
{
    // quartic powers of x reach four levels past the cut, so build larger and crop
    const int big = dim + 4;
    CMat X = position_operator(big, w);
    CMat P = momentum_operator(big, w);
    CMat X2 = X * X;
    CMat H = 0.5 * P * P + X2 * X2 - p.k2 * X2 + p.k1 * X;
    CMat h = H.topLeftCorner(dim, dim);
    return 0.5 * (h + h.adjoint());
}

static double ground_energy(const CMat& h)
{
    Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

HermitianOperator build_chemical_hamiltonian(const ModelParams& p, int dim, double basis_freq,
                                             bool check_convergence)
{
    if (p.family != ModelFamily::chemical)
        throw InvalidArgument("chemical builder needs a chemical parameter set");
    p.validate();
    require_dim(dim);
    if (!(basis_freq > 0.0)) throw InvalidArgument("basis frequency must be positive");

    HermitianOperator out = HermitianOperator::from_matrix(chemical_matrix(p, dim, basis_freq));
    out.params = p;
    out.basis_freq = basis_freq;
    if (check_convergence) {
        const double e_small = ground_energy(out.m);
        const double e_big = ground_energy(chemical_matrix(p, 2 * dim, basis_freq));
        if (std::abs(e_small - e_big) > 1e-6) {
            out.warnings.push_back("truncation not converged: ground energy shifts by " +
                                   std::to_string(std::abs(e_small - e_big)) + " on doubling dim");
        }
    }
    return out;
}

HermitianOperator build_hamiltonian(const ModelParams& p, int dim, double basis_freq)
{
    dim = resolve_dim(p, dim);
    if (p.family == ModelFamily::kpo) return build_kpo_hamiltonian(p, dim);
    if (basis_freq <= 0.0) basis_freq = default_basis_freq(p.k2);
    return build_chemical_hamiltonian(p, dim, basis_freq);
}

CMat dissipation_mode(const HermitianOperator& H)
{
    const int dim = H.dim();
    if (H.params && H.params->family == ModelFamily::chemical) {
        // (x + ip)/sqrt2 in units where mass = k4 = 1, independent of the basis
        CMat X = position_operator(dim, H.basis_freq);
        CMat P = momentum_operator(dim, H.basis_freq);
        return (X + cplx(0.0, 1.0) * P) / std::sqrt(2.0);
    }
    return annihilation_operator(dim);
}

StateVector coherent_state(cplx alpha, int dim)
{
    require_dim(dim);
    const double n = std::norm(alpha);
    if (dim < n + 10.0 * std::sqrt(n + 1.0))
        throw InvalidDimension("dimension " + std::to_string(dim) + " too small for coherent amplitude |alpha|^2 = " +
                               std::to_string(n));
    StateVector s;
    s.v = CVec::Zero(dim);
    cplx c = std::exp(-0.5 * n);
    s.v(0) = c;
    for (int k = 1; k < dim; ++k) {
        c *= alpha / std::sqrt(static_cast<double>(k));
        s.v(k) = c;
    }
    s.v.normalize();
    return s;
}

StateVector coherent_state_at(double x, double p, int dim, double basis_freq)
{
    const cplx alpha(x * std::sqrt(basis_freq / 2.0), p / std::sqrt(2.0 * basis_freq));
    return coherent_state(alpha, dim);
}

ConvertedParams convert_physical_params(const PhysicalDriveParams& p)
{
    if (!(p.omega_a > 0.0)) throw InvalidArgument("omega_a must be positive");
    ConvertedParams c;
    c.K = -1.5 * p.g4 + 10.0 * p.g3 * p.g3 / (3.0 * p.omega_a);
    if (!(c.K > 0.0)) throw SignError("Kerr coefficient is not positive in the chosen convention");
    c.eps1 = p.Omega1 / 2.0;
    c.eps2 = p.g3 * 4.0 * p.Omega2 / (3.0 * p.omega_a);
    c.eps1_over_K = c.eps1 / c.K;
    c.eps2_over_K = c.eps2 / c.K;
    return c;
}

} // namespace kerrwell
