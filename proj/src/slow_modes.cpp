#include "kerrwell/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

namespace kerrwell {

namespace {

using Vec = Eigen::VectorXcd;

constexpr int dense_limit = 400;  // below this many superoperator rows, diagonalize directly

cplx vec_trace(const Vec& x, int n)
{
    cplx t = 0.0;
    for (int k = 0; k < n; ++k) t += x(k + k * n);
    return t;
}

CMat unvec(const Vec& x, int n)
{
    return Eigen::Map<const CMat>(x.data(), n, n);
}

Vec vec(const CMat& m)
{
    return Eigen::Map<const Vec>(m.data(), m.size());
}

// deterministic pseudo-random start, independent of the standard library's distributions
Vec seeded_vector(Eigen::Index size)
{
    std::mt19937 gen(20240611u);
    Vec v(size);
    const double scale = 1.0 / 4294967296.0;
    for (Eigen::Index k = 0; k < size; ++k) {
        const double re = gen() * scale - 0.5;
        const double im = gen() * scale - 0.5;
        v(k) = cplx(re, im);
    }
    return v;
}

struct RawModes {
    Vec null_vector;                 // unit trace
    std::vector<cplx> lambdas;       // nonzero, ascending |lambda|
    std::vector<Vec> vectors;
    std::vector<std::string> warnings;
};

RawModes dense_modes(const Superoperator& S, int want)
{
    const int n = S.dim;
    CMat L = CMat(S.L);
    Eigen::ComplexEigenSolver<CMat> es(L);
    if (es.info() != Eigen::Success) throw NumericalFailure("dense generator eigensolver failed");
    const Vec& ev = es.eigenvalues();
    std::vector<int> order(ev.size());
    for (int k = 0; k < ev.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return std::abs(ev(a)) < std::abs(ev(b)); });

    RawModes out;
    out.null_vector = es.eigenvectors().col(order[0]);
    const cplx tr = vec_trace(out.null_vector, n);
    if (std::abs(tr) < 1e-12) throw DegenerateSteadyState("null vector of the generator is traceless");
    out.null_vector /= tr;
    for (int k = 1; k < static_cast<int>(order.size()) && k <= want; ++k) {
        out.lambdas.push_back(ev(order[k]));
        out.vectors.push_back(es.eigenvectors().col(order[k]));
    }
    return out;
}

class ShiftInvert {
public:
    ShiftInvert(const Superoperator& S, double sigma) : n_(S.dim), sigma_(sigma)
    {
        SpMat A = S.L;
        for (Eigen::Index k = 0; k < A.rows(); ++k) A.coeffRef(k, k) -= sigma;
        A.makeCompressed();
        lu_.analyzePattern(A);
        lu_.factorize(A);
        if (lu_.info() != Eigen::Success) throw NumericalFailure("sparse factorization of the shifted generator failed");
    }

    Vec solve(const Vec& b) const { return lu_.solve(b); }
    double sigma() const { return sigma_; }
    int n() const { return n_; }

private:
    int n_;
    double sigma_;
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
};

Vec null_by_inverse_iteration(const Superoperator& S, const ShiftInvert& op, std::vector<std::string>& warnings)
{
    const int n = S.dim;
    Vec x = Vec::Zero(static_cast<Eigen::Index>(n) * n);
    for (int k = 0; k < n; ++k) x(k + k * n) = 1.0 / n;
    double change = 1.0;
    for (int it = 0; it < 60 && change > 1e-13; ++it) {
        Vec y = op.solve(x);
        const cplx tr = vec_trace(y, n);
        if (!(std::abs(tr) > 0.0) || !std::isfinite(std::abs(tr)))
            throw NumericalFailure("inverse iteration lost the steady state");
        y /= tr;
        change = (y - x).cwiseAbs().maxCoeff();
        x = std::move(y);
    }
    if (change > 1e-9) warnings.push_back("steady-state inverse iteration converged only to " + std::to_string(change));
    return x;
}

RawModes arnoldi_modes(const Superoperator& S, const SpectralOptions& opt, const Vec& start_hint)
{
    const int n = S.dim;
    const Eigen::Index N = static_cast<Eigen::Index>(n) * n;
    ShiftInvert op(S, opt.shift);

    RawModes out;
    out.null_vector = null_by_inverse_iteration(S, op, out.warnings);
    const Vec& rho = out.null_vector;
    auto deflate = [&](Vec& x) { x -= vec_trace(x, n) * rho; };

    const int m_max = std::max(8, std::min<int>(opt.krylov_max, static_cast<int>(N) - 2));
    const int want = std::max(1, opt.modes);

    Vec start = start_hint.size() == N ? start_hint : Vec::Zero(N);
    Vec noise = seeded_vector(N);
    start += 1e-3 * (start.norm() > 0.0 ? start.norm() / noise.norm() : 1.0) * noise;

    for (int restart = 0; restart <= opt.restarts; ++restart) {
        deflate(start);
        CMat V = CMat::Zero(N, m_max + 1);
        CMat Hm = CMat::Zero(m_max + 1, m_max);
        V.col(0) = start / start.norm();
        int m = 0;
        bool invariant = false;
        Eigen::VectorXcd theta;
        CMat Y;
        std::vector<int> order;
        std::vector<bool> converged;

        for (int j = 0; j < m_max; ++j) {
            Vec w = op.solve(V.col(j));
            deflate(w);
            for (int pass = 0; pass < 2; ++pass) {
                Eigen::VectorXcd h = V.leftCols(j + 1).adjoint() * w;
                w -= V.leftCols(j + 1) * h;
                Hm.col(j).head(j + 1) += h;
            }
            const double beta = w.norm();
            Hm(j + 1, j) = beta;
            m = j + 1;
            const double hscale = Hm.col(j).head(j + 1).norm() + beta;
            if (beta <= 1e-13 * hscale) {
                invariant = true;
            } else {
                V.col(j + 1) = w / beta;
            }
            if (!invariant && m < m_max && m % 10 != 0) continue;

            Eigen::ComplexEigenSolver<CMat> es(Hm.topLeftCorner(m, m));
            theta = es.eigenvalues();
            Y = es.eigenvectors();
            order.assign(m, 0);
            for (int k = 0; k < m; ++k) order[k] = k;
            std::sort(order.begin(), order.end(),
                      [&](int a, int b) { return std::abs(theta(a)) > std::abs(theta(b)); });
            const int nk = std::min(want, m);
            converged.assign(nk, false);
            bool all = true;
            for (int k = 0; k < nk; ++k) {
                const int idx = order[k];
                const double res = std::abs(Hm(m, m - 1)) * std::abs(Y(m - 1, idx)) / Y.col(idx).norm();
                converged[k] = invariant || res <= opt.tol * std::abs(theta(idx));
                all = all && converged[k];
            }
            if (all || invariant) break;
        }

        const int nk = static_cast<int>(converged.size());
        const bool last = restart == opt.restarts;
        if ((nk > 0 && converged[0]) && (std::all_of(converged.begin(), converged.end(), [](bool c) { return c; }) || last)) {
            for (int k = 0; k < nk; ++k) {
                if (!converged[k]) {
                    out.warnings.push_back("slow mode " + std::to_string(k) + " did not converge and was dropped");
                    continue;
                }
                const int idx = order[k];
                out.lambdas.push_back(op.sigma() + 1.0 / theta(idx));
                out.vectors.push_back(V.leftCols(m) * Y.col(idx));
            }
            return out;
        }
        if (last) break;
        // explicit restart on the wanted Ritz directions
        start = Vec::Zero(N);
        for (int k = 0; k < nk; ++k) {
            Vec r = V.leftCols(m) * Y.col(order[k]);
            start += r / r.norm();
        }
    }
    throw NumericalFailure("shift-invert Arnoldi did not converge on the slowest mode");
}

RawModes slow_modes(const Superoperator& S, const SpectralOptions& opt, const Vec& hint)
{
    const Eigen::Index N = static_cast<Eigen::Index>(S.dim) * S.dim;
    RawModes raw = N <= dense_limit ? dense_modes(S, std::max(opt.modes, 1)) : arnoldi_modes(S, opt, hint);
    std::vector<int> order(raw.lambdas.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return std::abs(raw.lambdas[a]) < std::abs(raw.lambdas[b]); });
    RawModes sorted;
    sorted.null_vector = std::move(raw.null_vector);
    sorted.warnings = std::move(raw.warnings);
    for (int k : order) {
        sorted.lambdas.push_back(raw.lambdas[k]);
        sorted.vectors.push_back(std::move(raw.vectors[k]));
    }
    return sorted;
}

SteadyState finish_steady(const Superoperator& S, const Vec& null_vector, std::vector<std::string> warnings)
{
    const int n = S.dim;
    SteadyState out;
    out.warnings = std::move(warnings);
    CMat rho = unvec(null_vector, n);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    out.residual = apply_liouvillian(S, rho).cwiseAbs().maxCoeff();

    Eigen::SelfAdjointEigenSolver<CMat> es(rho);
    Eigen::VectorXd ev = es.eigenvalues();
    out.min_eigenvalue_before_clip = ev.minCoeff();
    if (out.min_eigenvalue_before_clip < -1e-6)
        throw NumericalFailure("steady state has eigenvalue " + std::to_string(out.min_eigenvalue_before_clip) +
                               " below the positivity floor");
    if (out.min_eigenvalue_before_clip < -1e-8)
        out.warnings.push_back("clipped steady-state eigenvalue " + std::to_string(out.min_eigenvalue_before_clip));
    for (int k = 0; k < ev.size(); ++k) ev(k) = std::max(ev(k), 0.0);
    ev /= ev.sum();
    out.rho.m = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
    out.rho.m = 0.5 * (out.rho.m + out.rho.m.adjoint()).eval();
    return out;
}

Sector classify(const CMat& R, const HermitianOperator& H, double& weight)
{
    const int n = H.dim();
    const double hs = 1.0 + H.m.cwiseAbs().maxCoeff();
    // a small number-operator bias resolves degeneracies the Hamiltonian leaves open
    CMat Hc = H.m + 1e-6 * hs * number_operator(n);
    Eigen::SelfAdjointEigenSolver<CMat> es(Hc);
    const Eigen::VectorXd& e = es.eigenvalues();
    CMat Rt = es.eigenvectors().adjoint() * R * es.eigenvectors();
    const double tol = 1e-9 * hs;
    double inside = 0.0;
    const double total = Rt.squaredNorm();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (std::abs(e(i) - e(j)) <= tol) inside += std::norm(Rt(i, j));
    weight = total > 0.0 ? inside / total : 0.0;
    if (weight >= 0.9) return Sector::population;
    if (weight <= 0.1) return Sector::coherence;
    return Sector::mixed;
}

} // namespace

SteadyState steady_state_detail(const Superoperator& L)
{
    SpectralOptions opt;
    opt.modes = 1;
    RawModes raw = slow_modes(L, opt, Vec());
    if (raw.lambdas.empty()) throw NumericalFailure("no relaxation mode found");
    if (std::abs(raw.lambdas[0]) < 1e-10)
        throw DegenerateSteadyState("generator has more than one stationary state");
    return finish_steady(L, raw.null_vector, raw.warnings);
}

DensityMatrix steady_state(const Superoperator& L)
{
    return steady_state_detail(L).rho;
}

double DecayFit::sector_rate(Sector s) const
{
    double best = std::numeric_limits<double>::quiet_NaN();
    for (const SlowMode& m : modes)
        if (m.sector == s && (std::isnan(best) || m.rate < best)) best = m.rate;
    return best;
}

DecayFit activation_time_spectral(const Superoperator& L, const SpectralOptions& opt)
{
    const int n = L.dim;
    WellSides sides = well_sides(L.H);
    CMat imbalance = sides.shallow - sides.deep;

    // start the Krylov space near the imbalance of the maximally mixed state
    Vec hint = vec(imbalance / static_cast<double>(n));
    RawModes raw = slow_modes(L, opt, hint);
    if (raw.lambdas.empty()) throw Indeterminate("no relaxation mode found");
    if (std::abs(raw.lambdas[0]) < 1e-10)
        throw Indeterminate("relaxation gap below resolution (|lambda| = " + std::to_string(std::abs(raw.lambdas[0])) + ")");

    SteadyState ss = finish_steady(L, raw.null_vector, raw.warnings);
    CMat target = 0.5 * (imbalance * ss.rho.m + ss.rho.m * imbalance);
    const double tnorm = target.norm();

    DecayFit fit;
    fit.method = DecayMethod::spectral;
    fit.rmse = std::numeric_limits<double>::quiet_NaN();
    fit.warnings = ss.warnings;
    fit.O = std::clamp((sides.shallow * ss.rho.m).trace().real(), 0.0, 1.0);

    double min_rate = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < raw.lambdas.size(); ++k) {
        SlowMode m;
        m.lambda = raw.lambdas[k];
        m.rate = std::abs(m.lambda.real());
        CMat R = unvec(raw.vectors[k], n);
        const double rn = R.norm();
        m.imbalance_overlap = (tnorm > 0.0 && rn > 0.0) ? std::abs((target.adjoint() * R).trace()) / (tnorm * rn) : 0.0;
        m.sector = classify(R, L.H, m.population_weight);
        min_rate = std::min(min_rate, m.rate);
        fit.modes.push_back(m);
    }
    if (!(min_rate > 0.0)) throw Indeterminate("slowest mode has no decay");

    int pick = -1;
    double best = -1.0;
    for (std::size_t k = 0; k < fit.modes.size(); ++k) {
        const SlowMode& m = fit.modes[k];
        if (m.rate > 10.0 * min_rate) continue;
        if (m.imbalance_overlap > best + 1e-12) {
            best = m.imbalance_overlap;
            pick = static_cast<int>(k);
        }
    }
    if (pick < 0 || best < 1e-12) {
        pick = 0;
        for (std::size_t k = 1; k < fit.modes.size(); ++k)
            if (fit.modes[k].rate < fit.modes[pick].rate) pick = static_cast<int>(k);
    }
    fit.modes[pick].selected = true;
    fit.T = 1.0 / fit.modes[pick].rate;
    return fit;
}

} // namespace kerrwell
