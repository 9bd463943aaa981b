#include "kerrwell/dynamics.hpp"

#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

#include "kerrwell/semiclassics.hpp"

namespace kerrwell {

void DissipationParams::validate() const
{
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InvalidArgument("kappa must be positive");
    if (!(n_th >= 0.0) || !std::isfinite(n_th)) throw InvalidArgument("n_th must be non-negative");
}

static SpMat to_sparse(const CMat& m)
{
    return m.sparseView(cplx(0.0), 0.0);
}

static SpMat identity(int n)
{
    SpMat I(n, n);
    I.setIdentity();
    return I;
}

namespace {

struct Channel {
    double rate;
    CMat c;
};

std::vector<Channel> channels(const CMat& a, const DissipationParams& d)
{
    std::vector<Channel> out;
    out.push_back({d.kappa * (1.0 + d.n_th), a});
    if (d.n_th > 0.0) out.push_back({d.kappa * d.n_th, a.adjoint()});
    return out;
}

} // namespace

Superoperator liouvillian(const HermitianOperator& H, const DissipationParams& d)
{
    d.validate();
    H.check_hermitian();
    const int n = H.dim();
    const cplx I(0.0, 1.0);

    Superoperator S;
    S.dim = n;
    S.H = H;
    S.dissipation = d;
    S.lowering = dissipation_mode(H);

    SpMat Id = identity(n);
    SpMat Hs = to_sparse(H.m);
    SpMat Ht = to_sparse(H.m.transpose());
    SpMat L = -I * (Eigen::kroneckerProduct(Id, Hs).eval() - Eigen::kroneckerProduct(Ht, Id).eval());

    for (const Channel& ch : channels(S.lowering, d)) {
        CMat cdc = ch.c.adjoint() * ch.c;
        SpMat jump = Eigen::kroneckerProduct(to_sparse(ch.c.conjugate()), to_sparse(ch.c));
        SpMat left = Eigen::kroneckerProduct(Id, to_sparse(cdc));
        SpMat right = Eigen::kroneckerProduct(to_sparse(cdc.transpose()), Id);
        L += ch.rate * (jump - 0.5 * left - 0.5 * right);
    }
    L.prune(cplx(0.0), 0.0);
    L.makeCompressed();
    S.L = std::move(L);

    Eigen::VectorXcd id = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n) * n);
    for (int k = 0; k < n; ++k) id(k + k * n) = 1.0;
    Eigen::VectorXcd left_null = S.L.adjoint() * id;
    double scale = 1.0;
    for (int k = 0; k < S.L.outerSize(); ++k)
        for (SpMat::InnerIterator it(S.L, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
    S.trace_residual = left_null.cwiseAbs().maxCoeff();
    if (S.trace_residual > 1e-10 * scale)
        throw ConsistencyError("generator does not preserve the trace (residual " +
                               std::to_string(S.trace_residual) + ")");
    return S;
}

CMat apply_liouvillian(const Superoperator& L, const CMat& rho)
{
    const cplx I(0.0, 1.0);
    CMat out = -I * (L.H.m * rho - rho * L.H.m);
    for (const Channel& ch : channels(L.lowering, L.dissipation)) {
        CMat cdc = ch.c.adjoint() * ch.c;
        out += ch.rate * (ch.c * rho * ch.c.adjoint() - 0.5 * (cdc * rho + rho * cdc));
    }
    return out;
}

WellProjectors well_projectors(int dim)
{
    if (dim < 2) throw InvalidDimension("dimension must be at least 2");
    Eigen::SelfAdjointEigenSolver<CMat> es(position_operator(dim));
    const Eigen::VectorXd& x = es.eigenvalues();
    const CMat& V = es.eigenvectors();
    const double scale = x.cwiseAbs().maxCoeff();
    WellProjectors P;
    P.right = CMat::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) {
        double w = 0.0;
        if (x(k) > 1e-12 * scale) w = 1.0;
        else if (x(k) >= -1e-12 * scale) w = 0.5;
        if (w > 0.0) P.right += w * V.col(k) * V.col(k).adjoint();
    }
    P.right = 0.5 * (P.right + P.right.adjoint()).eval();
    P.left = CMat::Identity(dim, dim) - P.right;
    return P;
}

WellSides well_sides(const HermitianOperator& H)
{
    WellProjectors P = well_projectors(H.dim());
    WellSides s;
    s.shallow = P.left;
    s.deep = P.right;
    s.shallow_is_left = true;
    if (!H.params) return s;
    try {
        ClassicalLandscape land = analyze_landscape(*H.params);
        s.x_shallow = land.shallow.x;
        s.p_shallow = land.shallow.p;
        if (land.shallow.x > 0.0) {
            s.shallow = P.right;
            s.deep = P.left;
            s.shallow_is_left = false;
        }
    } catch (const BistabilityLost&) {
        // a single well: keep the default labelling
    }
    return s;
}

DensityMatrix shallow_initial_state(const HermitianOperator& H)
{
    WellSides s = well_sides(H);
    return DensityMatrix::pure(coherent_state_at(s.x_shallow, s.p_shallow, H.dim(), H.basis_freq));
}

double trace_distance(const CMat& a, const CMat& b)
{
    CMat d = a - b;
    d = 0.5 * (d + d.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<CMat> es(d, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

std::string method_name(DecayMethod m)
{
    return m == DecayMethod::fit ? "fit" : "spectral";
}

std::string sector_name(Sector s)
{
    switch (s) {
    case Sector::population: return "population";
    case Sector::coherence: return "coherence";
    default: return "mixed";
    }
}

} // namespace kerrwell
