#include "kerrwell/dynamics.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>
#include <lapacke.h>

namespace kerrwell {

namespace {

// Orthonormal Hermitian basis: E_ii, then (E_ij + E_ji)/sqrt2 and i(E_ij - E_ji)/sqrt2 for i < j.
SpMat hermitian_basis(int n)
{
    const Eigen::Index N = static_cast<Eigen::Index>(n) * n;
    const double r = 1.0 / std::sqrt(2.0);
    std::vector<Eigen::Triplet<cplx>> t;
    t.reserve(2 * N);
    Eigen::Index col = 0;
    for (int i = 0; i < n; ++i) t.emplace_back(i + i * n, col++, 1.0);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            t.emplace_back(i + j * n, col, r);
            t.emplace_back(j + i * n, col, r);
            ++col;
            t.emplace_back(i + j * n, col, cplx(0.0, r));
            t.emplace_back(j + i * n, col, cplx(0.0, -r));
            ++col;
        }
    }
    SpMat U(N, N);
    U.setFromTriplets(t.begin(), t.end());
    return U;
}

Eigen::VectorXd to_coordinates(const CMat& rho)
{
    const int n = static_cast<int>(rho.rows());
    Eigen::VectorXd y(static_cast<Eigen::Index>(n) * n);
    const double s = std::sqrt(2.0);
    Eigen::Index k = 0;
    for (int i = 0; i < n; ++i) y(k++) = rho(i, i).real();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            // Tr(B rho) for the two off-diagonal basis elements
            y(k++) = s * rho(i, j).real();
            y(k++) = s * rho(i, j).imag();
        }
    }
    return y;
}

CMat from_coordinates(const Eigen::VectorXd& y, int n)
{
    CMat rho(n, n);
    const double r = 1.0 / std::sqrt(2.0);
    Eigen::Index k = 0;
    for (int i = 0; i < n; ++i) rho(i, i) = y(k++);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double a = y(k++);
            const double b = y(k++);
            rho(i, j) = cplx(a, b) * r;
            rho(j, i) = cplx(a, -b) * r;
        }
    }
    return rho;
}

} // namespace

struct Propagator::Impl {
    int n = 0;
    Eigen::VectorXd wr;
    Eigen::VectorXd wi;
    Eigen::VectorXcd lambdas;
    Eigen::MatrixXd vr;
    Eigen::VectorXd coeff;
    double rcond = 0.0;
    double recon = 0.0;
    bool has_initial = false;
};

Propagator::Propagator(const Superoperator& L) : impl_(std::make_unique<Impl>())
{
    const int n = L.dim;
    if (n > max_dense_propagation_dim)
        throw InvalidDimension("dense propagation supports dim <= " + std::to_string(max_dense_propagation_dim) +
                               "; use the spectral activation time for larger truncations");
    impl_->n = n;
    const Eigen::Index N = static_cast<Eigen::Index>(n) * n;

    SpMat U = hermitian_basis(n);
    SpMat Mc = (SpMat(U.adjoint()) * L.L * U).pruned();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N, N);
    double imag_residue = 0.0;
    for (int k = 0; k < Mc.outerSize(); ++k) {
        for (SpMat::InnerIterator it(Mc, k); it; ++it) {
            M(it.row(), it.col()) = it.value().real();
            imag_residue = std::max(imag_residue, std::abs(it.value().imag()));
        }
    }
    if (imag_residue > 1e-9 * std::max(1.0, M.cwiseAbs().maxCoeff()))
        throw ConsistencyError("generator does not map Hermitian matrices to Hermitian matrices");

    impl_->wr.resize(N);
    impl_->wi.resize(N);
    impl_->vr.resize(N, N);
    const lapack_int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'V', static_cast<lapack_int>(N), M.data(),
                                          static_cast<lapack_int>(N), impl_->wr.data(), impl_->wi.data(), nullptr, 1,
                                          impl_->vr.data(), static_cast<lapack_int>(N));
    if (info != 0) throw NumericalFailure("dgeev failed with code " + std::to_string(info));

    // the stationary eigenvalue carries roundoff of order 1e-12, which compounds over long times
    Eigen::Index zero = 0;
    impl_->wr.binaryExpr(impl_->wi, [](double a, double b) { return std::hypot(a, b); }).minCoeff(&zero);
    if (impl_->wi(zero) != 0.0) throw NumericalFailure("stationary eigenvalue is not real");
    impl_->wr(zero) = 0.0;

    impl_->lambdas.resize(N);
    for (Eigen::Index k = 0; k < N; ++k) impl_->lambdas(k) = cplx(impl_->wr(k), impl_->wi(k));
}

Propagator::~Propagator() = default;
Propagator::Propagator(Propagator&&) noexcept = default;
Propagator& Propagator::operator=(Propagator&&) noexcept = default;

int Propagator::dim() const { return impl_->n; }

const Eigen::VectorXcd& Propagator::eigenvalues() const { return impl_->lambdas; }

double Propagator::eigenvector_condition_estimate() const
{
    return impl_->rcond > 0.0 ? 1.0 / impl_->rcond : std::numeric_limits<double>::infinity();
}

double Propagator::reconstruction_error() const { return impl_->recon; }

void Propagator::set_initial(const DensityMatrix& rho0)
{
    if (rho0.dim() != impl_->n) throw InvalidDimension("initial state dimension does not match the generator");
    const Eigen::Index N = impl_->vr.rows();
    Eigen::VectorXd y0 = to_coordinates(rho0.m);

    Eigen::MatrixXd lu = impl_->vr;
    std::vector<lapack_int> piv(N);
    const double anorm = lu.cwiseAbs().colwise().sum().maxCoeff();
    lapack_int info = LAPACKE_dgetrf(LAPACK_COL_MAJOR, static_cast<lapack_int>(N), static_cast<lapack_int>(N), lu.data(),
                                     static_cast<lapack_int>(N), piv.data());
    if (info != 0) throw NumericalFailure("eigenvector matrix is singular");
    LAPACKE_dgecon(LAPACK_COL_MAJOR, '1', static_cast<lapack_int>(N), lu.data(), static_cast<lapack_int>(N), anorm,
                   &impl_->rcond);
    impl_->coeff = y0;
    info = LAPACKE_dgetrs(LAPACK_COL_MAJOR, 'N', static_cast<lapack_int>(N), 1, lu.data(), static_cast<lapack_int>(N),
                          piv.data(), impl_->coeff.data(), static_cast<lapack_int>(N));
    if (info != 0) throw NumericalFailure("eigen-expansion solve failed");
    impl_->recon = (impl_->vr * impl_->coeff - y0).norm() / y0.norm();
    impl_->has_initial = true;
}

DensityMatrix Propagator::state_at(double t) const
{
    if (!impl_->has_initial) throw InvalidArgument("propagator has no initial state");
    const Eigen::Index N = impl_->vr.rows();
    const Eigen::VectorXd& c = impl_->coeff;
    Eigen::VectorXd d(N);
    for (Eigen::Index k = 0; k < N; ++k) {
        const double mu = impl_->wr(k);
        const double om = impl_->wi(k);
        if (om == 0.0) {
            d(k) = std::exp(mu * t) * c(k);
        } else {
            // columns k, k+1 hold the real and imaginary parts of the eigenvector
            const double g = std::exp(mu * t);
            const double cs = std::cos(om * t);
            const double sn = std::sin(om * t);
            d(k) = g * (c(k) * cs + c(k + 1) * sn);
            d(k + 1) = g * (-c(k) * sn + c(k + 1) * cs);
            ++k;
        }
    }
    DensityMatrix out;
    out.m = from_coordinates(impl_->vr * d, impl_->n);
    return out;
}

std::vector<double> log_time_grid(double t_max, int points)
{
    if (points < 3) throw InvalidArgument("time grid needs at least 3 points");
    if (!(t_max > 1e-2)) throw InvalidArgument("time grid end must exceed 1e-2");
    std::vector<double> t(points);
    t[0] = 0.0;
    const double a = std::log(1e-2);
    const double b = std::log(t_max);
    for (int k = 1; k < points; ++k) t[k] = std::exp(a + (b - a) * (k - 1) / (points - 2));
    t[points - 1] = t_max;
    return t;
}

Trajectory evolve(const DensityMatrix& rho0, const Superoperator& L, const std::vector<double>& times)
{
    return evolve(rho0, L, times, well_sides(L.H));
}

Trajectory evolve(const DensityMatrix& rho0, const Superoperator& L, const std::vector<double>& times,
                  const WellSides& sides)
{
    if (times.empty() || times.front() != 0.0) throw InvalidArgument("times must start at 0");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1])) throw InvalidArgument("times must be strictly ascending");
    rho0.validate();

    Propagator prop(L);
    prop.set_initial(rho0);
    Trajectory tr;
    if (prop.reconstruction_error() > 1e-8)
        tr.warnings.push_back("initial-state eigen-expansion mismatch " + std::to_string(prop.reconstruction_error()));

    for (double t : times) {
        CMat rho = t == 0.0 ? rho0.m : prop.state_at(t).m;
        const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
        rho = 0.5 * (rho + rho.adjoint()).eval();
        const double tr_rho = rho.trace().real();
        const double terr = std::abs(tr_rho - 1.0);
        if (terr > 1e-6)
            throw IntegrationFailure("trace drift " + std::to_string(terr) + " at t = " + std::to_string(t));
        Eigen::SelfAdjointEigenSolver<CMat> es(rho, Eigen::EigenvaluesOnly);
        const double mn = es.eigenvalues().minCoeff();
        if (mn < -1e-6) throw IntegrationFailure("state lost positivity at t = " + std::to_string(t));
        const double ps = (sides.shallow * rho).trace().real() / tr_rho;
        const double pd = (sides.deep * rho).trace().real() / tr_rho;
        tr.times.push_back(t);
        tr.shallow_population.push_back(ps);
        tr.deep_population.push_back(pd);
        tr.trace_error.push_back(terr);
        tr.hermiticity_error.push_back(herm);
        tr.min_eigenvalue.push_back(mn);
    }
    return tr;
}

} // namespace kerrwell
