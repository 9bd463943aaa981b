#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "kerrwell/hilbert.hpp"
#include "kerrwell/spectra.hpp"

using namespace kerrwell;

namespace {

constexpr double pi = 3.14159265358979323846;

// Colbert-Miller sinc grid for p^2/2 + x^4 - k2 x^2 + k1 x; converges exponentially in the spacing.
Eigen::VectorXd grid_levels(double k1, double k2, double half_width, int points)
{
    const double h = 2.0 * half_width / (points - 1);
    Eigen::MatrixXd H(points, points);
    for (int i = 0; i < points; ++i) {
        const double x = -half_width + i * h;
        for (int j = 0; j < points; ++j) {
            const int d = i - j;
            H(i, j) = d == 0 ? pi * pi / (6.0 * h * h) : ((d % 2 == 0) ? 1.0 : -1.0) / (h * h * d * d);
        }
        H(i, i) += x * x * x * x - k2 * x * x + k1 * x;
    }
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H, Eigen::EigenvaluesOnly).eigenvalues();
}

double max_abs(const CMat& m) { return m.cwiseAbs().maxCoeff(); }

} // namespace

TEST_CASE("annihilation operator entries and truncation artifact")
{
    CMat a = annihilation_operator(3);
    CHECK(a(0, 1).real() == doctest::Approx(1.0));
    CHECK(a(1, 2).real() == doctest::Approx(std::sqrt(2.0)));
    CHECK(std::abs(a(0, 0)) == 0.0);
    CHECK(std::abs(a(1, 0)) == 0.0);

    CMat n = creation_operator(5) * annihilation_operator(5);
    for (int k = 0; k < 5; ++k) CHECK(n(k, k).real() == doctest::Approx(k));
    CHECK(max_abs(n - number_operator(5)) < 1e-14);

    const int dim = 6;
    CMat comm = annihilation_operator(dim) * creation_operator(dim) - creation_operator(dim) * annihilation_operator(dim);
    for (int k = 0; k < dim - 1; ++k) CHECK(comm(k, k).real() == doctest::Approx(1.0));
    CHECK(comm(dim - 1, dim - 1).real() == doctest::Approx(-(dim - 1)));

    CHECK_THROWS_AS(annihilation_operator(1), InvalidDimension);
    CHECK_THROWS_AS(position_operator(1), InvalidDimension);
}

TEST_CASE("KPO Hamiltonian examples")
{
    HermitianOperator H = build_kpo_hamiltonian(ModelParams::kpo(0.0, 0.0), 4);
    CHECK(H.sign == EnergySign::inverted);
    const double expect[4] = {0.0, 0.0, -2.0, -6.0};
    for (int k = 0; k < 4; ++k) CHECK(H.m(k, k).real() == doctest::Approx(expect[k]));
    CHECK(max_abs(H.m - CMat(H.m.diagonal().asDiagonal())) < 1e-15);

    // wells are the largest eigenvalues of the physical operator
    HermitianOperator deep = build_kpo_hamiltonian(ModelParams::kpo(0.0, 7.7), 60);
    Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<CMat>(deep.m, Eigen::EigenvaluesOnly).eigenvalues();
    CHECK(ev(59) - ev(58) < 1e-6);

    Spectrum plus = eigensystem(build_kpo_hamiltonian(ModelParams::kpo(1.0, 5.0, pi / 2), 60));
    Spectrum minus = eigensystem(build_kpo_hamiltonian(ModelParams::kpo(1.0, 5.0, -pi / 2), 60));
    CHECK((plus.energies - minus.energies).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("every builder emits exactly Hermitian matrices")
{
    for (double e1 : {0.0, 0.7, 3.0})
        for (double phi : {0.0, 0.4, 2.0}) {
            HermitianOperator H = build_kpo_hamiltonian(ModelParams::kpo(e1, 6.0, phi), 64);
            CHECK(max_abs(H.m - H.m.adjoint()) == 0.0);
        }
    for (double k1 : {0.0, 1.5}) {
        HermitianOperator H = build_chemical_hamiltonian(ModelParams::chemical(k1, 8.0), 80, default_basis_freq(8.0));
        CHECK(max_abs(H.m - H.m.adjoint()) <= 1e-12 * max_abs(H.m));
    }
    CMat bad = CMat::Zero(2, 2);
    bad(0, 1) = 1.0;
    CHECK_THROWS_AS(HermitianOperator::from_matrix(bad), ConsistencyError);
}

TEST_CASE("KPO spectrum at zero linear drive does not depend on the phase")
{
    const Spectrum ref = eigensystem(build_kpo_hamiltonian(ModelParams::kpo(0.0, 6.0, 0.0), 64));
    for (double phi : {0.3, 1.1, 2.5, pi}) {
        const Spectrum s = eigensystem(build_kpo_hamiltonian(ModelParams::kpo(0.0, 6.0, phi), 64));
        CHECK((s.energies - ref.energies).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("parity commutes with symmetric Hamiltonians")
{
    const int dim = 70;
    CMat P = parity_operator(dim);
    HermitianOperator kpo = build_kpo_hamiltonian(ModelParams::kpo(0.0, 7.7), dim);
    CHECK(max_abs(kpo.m * P - P * kpo.m) < 1e-10);
    HermitianOperator chem = build_chemical_hamiltonian(ModelParams::chemical(0.0, 12.6), dim, default_basis_freq(12.6));
    CHECK(max_abs(chem.m * P - P * chem.m) < 1e-10 * max_abs(chem.m));

    // definite parity of every chemical eigenvector at k1 = 0
    Spectrum s = eigensystem(chem, 20);
    for (int k = 0; k < s.size(); ++k) {
        const double par = (s.vectors.col(k).adjoint() * P * s.vectors.col(k))(0).real();
        CHECK(std::abs(std::abs(par) - 1.0) < 1e-8);
    }
}

TEST_CASE("truncation convergence at default dimensions")
{
    for (double e2 : {2.0, 7.7, 12.0}) {
        const int dim = default_kpo_dim(e2);
        Spectrum a = eigensystem(build_kpo_hamiltonian(ModelParams::kpo(0.5, e2), dim), 10);
        Spectrum b = eigensystem(build_kpo_hamiltonian(ModelParams::kpo(0.5, e2), 2 * dim), 10);
        CHECK((a.energies - b.energies).cwiseAbs().maxCoeff() < 1e-8);
    }
    CHECK(default_kpo_dim(0.0) == 60);
    CHECK(default_kpo_dim(12.0) == static_cast<int>(std::ceil(48.0 + 6.0 * std::sqrt(12.0) + 20.0)));
}

TEST_CASE("chemical Hamiltonian against a position-grid oracle")
{
    // pure quartic ground energy; the frozen value is the grid result at 401 points on [-6, 6]
    const Eigen::VectorXd quartic = grid_levels(0.0, 0.0, 6.0, 401);
    CHECK(quartic(0) == doctest::Approx(0.667986259157537).epsilon(1e-12));
    HermitianOperator H0 = build_hamiltonian(ModelParams::chemical(0.0, 0.0));
    Spectrum s0 = eigensystem(H0, 4);
    CHECK(std::abs(s0.energies(0) - quartic(0)) < 1e-8);

    const Eigen::VectorXd wells = grid_levels(0.0, 12.6, 7.0, 501);
    HermitianOperator H = build_hamiltonian(ModelParams::chemical(0.0, 12.6));
    Spectrum s = eigensystem(H, 6);
    CHECK(s.energies(1) - s.energies(0) < 1e-4);
    for (int k = 0; k < 6; ++k) CHECK(std::abs(s.energies(k) - wells(k)) < 1e-7);

    const Eigen::VectorXd tilted = grid_levels(1.3, 9.0, 7.0, 501);
    Spectrum st = eigensystem(build_hamiltonian(ModelParams::chemical(1.3, 9.0)), 6);
    for (int k = 0; k < 6; ++k) CHECK(std::abs(st.energies(k) - tilted(k)) < 1e-7);
}

TEST_CASE("chemical truncation too small raises a convergence warning")
{
    HermitianOperator H = build_chemical_hamiltonian(ModelParams::chemical(0.0, 12.6), 12, default_basis_freq(12.6));
    CHECK_FALSE(H.warnings.empty());
    HermitianOperator ok = build_chemical_hamiltonian(ModelParams::chemical(0.0, 12.6), 120, default_basis_freq(12.6));
    CHECK(ok.warnings.empty());
}

TEST_CASE("coherent states")
{
    StateVector vac = coherent_state(0.0, 10);
    CHECK(std::abs(vac.v(0) - cplx(1.0)) < 1e-15);
    CHECK(vac.v.tail(9).norm() < 1e-15);

    StateVector s = coherent_state(std::sqrt(7.7), 60);
    const double n = (s.v.adjoint() * number_operator(60) * s.v)(0).real();
    CHECK(std::abs(n - 7.7) < 1e-5);
    CHECK(std::abs(s.v.norm() - 1.0) < 1e-10);

    for (double a2 : {0.5, 2.0, 5.0}) {
        const int dim = 60;
        const cplx alpha(std::sqrt(a2), 0.0);
        const cplx ov = coherent_state(alpha, dim).v.dot(coherent_state(-alpha, dim).v);
        CHECK(std::abs(std::norm(ov) - std::exp(-4.0 * a2)) < 1e-8);
    }

    const cplx alpha(1.2, -0.7);
    StateVector c = coherent_state(alpha, 40);
    const double x = (c.v.adjoint() * position_operator(40) * c.v)(0).real();
    CHECK(std::abs(x - std::sqrt(2.0) * alpha.real()) < 1e-8);

    CHECK_THROWS_AS(coherent_state(std::sqrt(7.7), 20), InvalidDimension);
}

TEST_CASE("quadrature operators")
{
    const int dim = 12;
    CMat X = position_operator(dim);
    CMat P = momentum_operator(dim);
    CMat comm = X * P - P * X;
    for (int k = 0; k < dim - 1; ++k) CHECK(std::abs(comm(k, k) - cplx(0.0, 1.0)) < 1e-14);
    CHECK(max_abs(X - X.adjoint()) == 0.0);
    CHECK(max_abs(P - P.adjoint()) == 0.0);

    Eigen::VectorXd xs = Eigen::SelfAdjointEigenSolver<CMat>(X, Eigen::EigenvaluesOnly).eigenvalues();
    for (int k = 0; k < dim; ++k) CHECK(std::abs(xs(k) + xs(dim - 1 - k)) < 1e-10);
}

TEST_CASE("physical parameter conversion")
{
    const double two_pi = 2.0 * pi;
    PhysicalDriveParams p;
    p.g3 = two_pi * -16.8e6;
    p.g4 = two_pi * -0.296e6;
    p.omega_a = two_pi * 6086e6;
    p.Omega1 = two_pi * 1e6;
    p.Omega2 = two_pi * 30e6;
    ConvertedParams c = convert_physical_params(p);
    // K = -3 g4 / 2 + 10 g3^2 / (3 omega_a), evaluated by hand in MHz
    const double k_mhz = -1.5 * -0.296 + 10.0 * 16.8 * 16.8 / (3.0 * 6086.0);
    CHECK(c.K / two_pi / 1e6 == doctest::Approx(k_mhz).epsilon(1e-12));
    CHECK(c.K / two_pi / 1e6 == doctest::Approx(0.5987).epsilon(1e-3));
    CHECK(c.eps1 == doctest::Approx(two_pi * 0.5e6).epsilon(1e-15));
    CHECK(c.eps2 == doctest::Approx(p.g3 * 4.0 * p.Omega2 / (3.0 * p.omega_a)).epsilon(1e-15));
    CHECK(c.eps1_over_K == doctest::Approx(c.eps1 / c.K));

    p.g3 = 0.0;
    ConvertedParams z = convert_physical_params(p);
    CHECK(z.eps2 == 0.0);

    PhysicalDriveParams neg = p;
    neg.g4 = two_pi * 1e6;
    CHECK_THROWS_AS(convert_physical_params(neg), SignError);
    PhysicalDriveParams bad = p;
    bad.omega_a = 0.0;
    CHECK_THROWS_AS(convert_physical_params(bad), UsageError);
}

TEST_CASE("model parameter validation")
{
    CHECK_THROWS_AS(ModelParams::kpo(0.0, -1.0).validate(), InvalidArgument);
    CHECK_THROWS_AS(ModelParams::chemical(0.0, -0.1).validate(), InvalidArgument);
    ModelParams p = ModelParams::kpo(1.0, 5.0);
    p.input_rescale = 1.3;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p.input_rescale = 1.05;
    CHECK(p.drive1() == doctest::Approx(1.05));
    CHECK(p.drive2() == doctest::Approx(5.25));

    DensityMatrix rho;
    rho.m = CMat::Identity(3, 3) * 0.5;
    CHECK_THROWS_AS(rho.validate(), ConsistencyError);
    StateVector v;
    v.v = CVec::Ones(2);
    CHECK_THROWS_AS(v.validate(), ConsistencyError);
}
