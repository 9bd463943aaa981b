#include "kerrwell/dynamics.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace kerrwell {

DetailedBalanceReport detailed_balance_analysis(const DensityMatrix& rho_ss, const Spectrum& spec, double threshold)
{
    if (rho_ss.dim() != spec.dim) throw InvalidDimension("steady state and spectrum dimensions differ");
    const int levels = spec.size();

    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (rho_ss.m + rho_ss.m.adjoint()));
    const Eigen::VectorXd& pop = es.eigenvalues();
    CMat overlap = spec.vectors.adjoint() * es.eigenvectors();

    DetailedBalanceReport rep;
    rep.populations.resize(levels);
    for (int n = 0; n < levels; ++n) {
        Eigen::Index best;
        overlap.row(n).cwiseAbs2().maxCoeff(&best);
        rep.populations[n] = std::max(pop(best), 0.0);
    }

    for (int n = 0; n + 1 < levels; ++n) {
        const double pa = rep.populations[n];
        const double pb = rep.populations[n + 1];
        if (pa <= threshold || pb <= threshold) continue;
        const double de = spec.energies(n + 1) - spec.energies(n);
        if (!(de > 0.0)) continue;
        rep.pairs.emplace_back(n, n + 1);
        rep.beta_values.push_back(-std::log(pb / pa) / de);
    }
    if (rep.beta_values.size() < 2) throw InsufficientSupport("fewer than two population pairs above threshold");

    double mean = 0.0;
    for (double b : rep.beta_values) mean += b;
    mean /= static_cast<double>(rep.beta_values.size());
    double var = 0.0;
    for (double b : rep.beta_values) var += (b - mean) * (b - mean);
    rep.beta_avg = mean;
    rep.beta_std = std::sqrt(var / static_cast<double>(rep.beta_values.size()));

    // Boltzmann weights in the eigenbasis, shifted in the exponent to stay finite
    Eigen::VectorXd w(levels);
    for (int n = 0; n < levels; ++n) w(n) = -mean * spec.energies(n);
    w.array() -= w.maxCoeff();
    w = w.array().exp().matrix();
    w /= w.sum();
    CMat gibbs = spec.vectors * w.asDiagonal() * spec.vectors.adjoint();
    rep.trace_distance = std::clamp(trace_distance(rho_ss.m, gibbs), 0.0, 1.0);
    return rep;
}

} // namespace kerrwell
