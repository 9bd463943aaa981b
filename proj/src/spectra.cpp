#include "kerrwell/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace kerrwell {

namespace {

// rotate a degenerate cluster onto eigenvectors of a symmetry-resolving operator
void canonicalize_cluster(CMat& V, int first, int count, const CMat& X, const CMat& parity, bool use_parity)
{
    CMat block = V.middleCols(first, count);
    CMat B = block.adjoint() * (use_parity ? parity : X) * block;
    B = 0.5 * (B + B.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<CMat> es(B);
    block = block * es.eigenvectors();

    std::vector<int> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> par(count), pos(count);
    for (int k = 0; k < count; ++k) {
        par[k] = (block.col(k).adjoint() * parity * block.col(k))(0).real();
        pos[k] = (block.col(k).adjoint() * X * block.col(k))(0).real();
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (std::abs(par[a] - par[b]) > 1e-8) return par[a] > par[b];
        return pos[a] < pos[b];
    });
    for (int k = 0; k < count; ++k) V.col(first + k) = block.col(order[k]);
}

void fix_phase(CMat& V)
{
    for (Eigen::Index k = 0; k < V.cols(); ++k) {
        Eigen::Index idx;
        V.col(k).cwiseAbs().maxCoeff(&idx);
        const cplx z = V(idx, k);
        if (std::abs(z) > 0.0) V.col(k) *= std::conj(z) / std::abs(z);
    }
}

} // namespace

Spectrum eigensystem(const HermitianOperator& H, int n_keep)
{
    const int dim = H.dim();
    if (n_keep > dim) throw InvalidArgument("n_keep exceeds the dimension");
    if (n_keep <= 0) n_keep = dim;

    const double sgn = H.sign == EnergySign::inverted ? -1.0 : 1.0;
    CMat M = sgn * H.m;
    Eigen::SelfAdjointEigenSolver<CMat> es(M);
    if (es.info() != Eigen::Success) throw NumericalFailure("Hermitian eigensolver failed");
    Eigen::VectorXd e = es.eigenvalues();
    CMat V = es.eigenvectors();

    const double range = std::max(e.maxCoeff() - e.minCoeff(), 1e-300);
    const double escale = std::max(1.0, e.cwiseAbs().maxCoeff());
    const CMat X = position_operator(dim, H.basis_freq);
    const CMat parity = parity_operator(dim);
    const bool parity_symmetric =
        (M * parity - parity * M).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, M.cwiseAbs().maxCoeff());

    for (int i = 0; i < dim;) {
        int j = i + 1;
        while (j < dim && e(j) - e(j - 1) <= 1e-9 * escale) ++j;
        if (j - i > 1) canonicalize_cluster(V, i, j - i, X, parity, parity_symmetric);
        i = j;
    }
    fix_phase(V);

    Spectrum s;
    s.energies = e.head(n_keep);
    s.vectors = V.leftCols(n_keep);
    s.params = H.params;
    s.dim = dim;
    s.sign = H.sign;
    s.warnings = H.warnings;

    CMat R = M * s.vectors - s.vectors * s.energies.asDiagonal();
    s.residual = R.cwiseAbs().maxCoeff();
    if (s.residual > 1e-8 * range) throw NumericalFailure("eigenpair residual check failed");
    return s;
}

Eigen::VectorXd transition_spectrum(const Spectrum& spec)
{
    if (spec.size() == 0) return Eigen::VectorXd();
    return (spec.energies.array() - spec.energies(0)).abs().matrix();
}

Axis parse_axis(const std::string& s)
{
    if (s == "eps1") return Axis::eps1;
    if (s == "eps2") return Axis::eps2;
    if (s == "phi") return Axis::phi;
    if (s == "k1") return Axis::k1;
    if (s == "k2") return Axis::k2;
    throw InvalidArgument("unknown axis '" + s + "'");
}

std::string axis_name(Axis a)
{
    switch (a) {
    case Axis::eps1: return "eps1";
    case Axis::eps2: return "eps2";
    case Axis::phi: return "phi";
    case Axis::k1: return "k1";
    default: return "k2";
    }
}

bool axis_valid_for(Axis a, ModelFamily f)
{
    if (f == ModelFamily::kpo) return a == Axis::eps1 || a == Axis::eps2 || a == Axis::phi;
    return a == Axis::k1 || a == Axis::k2;
}

ModelParams with_axis(ModelParams p, Axis a, double value)
{
    if (!axis_valid_for(a, p.family))
        throw InvalidArgument("axis " + axis_name(a) + " does not apply to the " + family_name(p.family) + " model");
    switch (a) {
    case Axis::eps1: p.eps1 = value; break;
    case Axis::eps2: p.eps2 = value; break;
    case Axis::phi: p.phi = value; break;
    case Axis::k1: p.k1 = value; break;
    case Axis::k2: p.k2 = value; break;
    }
    return p;
}

double axis_value(const ModelParams& p, Axis a)
{
    switch (a) {
    case Axis::eps1: return p.eps1;
    case Axis::eps2: return p.eps2;
    case Axis::phi: return p.phi;
    case Axis::k1: return p.k1;
    default: return p.k2;
    }
}

GapTrace gap_trace(const ModelParams& base, Axis axis, const std::vector<double>& values,
                   const std::vector<std::pair<int, int>>& pairs, const GapTraceOptions& opt)
{
    if (!axis_valid_for(axis, base.family))
        throw InvalidArgument("axis " + axis_name(axis) + " does not apply to this model");
    if (values.empty() || pairs.empty()) throw InvalidArgument("gap trace needs axis values and level pairs");

    GapTrace tr;
    tr.axis = axis;
    tr.values = values;
    tr.pairs = pairs;
    tr.gaps.assign(pairs.size(), std::vector<double>(values.size(), 0.0));
    tr.tracked.assign(pairs.size(), std::vector<std::pair<int, int>>(values.size()));
    tr.warnings.assign(values.size(), {});

    int top = 0;
    for (auto [a, b] : pairs) {
        if (a < 0 || b < 0) throw InvalidArgument("level indices must be non-negative");
        top = std::max({top, a, b});
    }

    int dim = opt.dim;
    if (dim <= 0) {
        ModelParams widest = base;
        if (base.family == ModelFamily::kpo && axis == Axis::eps2) {
            widest.eps2 = 0.0;
            for (double v : values) widest.eps2 = std::max(widest.eps2, std::abs(v));
        }
        dim = resolve_dim(widest, 0);
    }
    tr.dim = dim;
    const int n_keep = std::min(dim, opt.n_keep > 0 ? opt.n_keep : top + 8);
    if (top >= n_keep) throw InvalidArgument("level pair beyond retained levels");

    // label -> current level index, labels being the requested indices at the first point
    std::vector<int> labels;
    for (auto [a, b] : pairs) {
        labels.push_back(a);
        labels.push_back(b);
    }
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    std::vector<int> current = labels;

    auto solve = [&](double v) {
        return eigensystem(build_hamiltonian(with_axis(base, axis, v), dim, opt.basis_freq), n_keep);
    };

    // greedy overlap matching, ties broken by energy proximity; returns the worst tracked overlap
    auto match = [&](const Spectrum& from, const Spectrum& to, std::vector<int>& idx) {
        CMat O = from.vectors.adjoint() * to.vectors;
        std::vector<int> next(labels.size(), -1);
        std::vector<bool> used(n_keep, false);
        std::vector<int> order(labels.size());
        std::iota(order.begin(), order.end(), 0);
        std::vector<double> bestov(labels.size(), 0.0);
        for (std::size_t l = 0; l < labels.size(); ++l) bestov[l] = O.row(idx[l]).cwiseAbs2().maxCoeff();
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return bestov[a] > bestov[b]; });
        double worst = 1.0;
        for (int l : order) {
            const int f = idx[l];
            int pick = -1;
            double best = -1.0;
            for (int j = 0; j < n_keep; ++j) {
                if (used[j]) continue;
                const double ov = std::norm(O(f, j));
                const bool better = ov > best + 1e-9 ||
                                    (std::abs(ov - best) <= 1e-9 && pick >= 0 &&
                                     std::abs(to.energies(j) - from.energies(f)) <
                                         std::abs(to.energies(pick) - from.energies(f)));
                if (better) {
                    best = ov;
                    pick = j;
                }
            }
            used[pick] = true;
            next[l] = pick;
            worst = std::min(worst, best);
        }
        idx = next;
        return worst;
    };

    // Follows the eigenvectors continuously. A step is bisected while its overlaps drop below 0.9
    // or a tracked level changes its energy rank: an avoided crossing resolves into a smooth
    // path that keeps the rank, while an exact crossing keeps swapping down to min_step.
    double span = 0.0;
    for (double v : values) span = std::max(span, std::abs(v - values.front()));
    const double min_step = std::max(span, 1.0) * 1e-4;
    std::function<double(const Spectrum&, double, const Spectrum&, double, std::vector<int>&)> advance =
        [&](const Spectrum& a, double va, const Spectrum& b, double vb, std::vector<int>& idx) {
            std::vector<int> trial = idx;
            const double worst = match(a, b, trial);
            if ((worst >= 0.9 && trial == idx) || std::abs(vb - va) <= min_step) {
                idx = trial;
                return worst;
            }
            const double vm = 0.5 * (va + vb);
            const Spectrum m = solve(vm);
            const double w1 = advance(a, va, m, vm, idx);
            const double w2 = advance(m, vm, b, vb, idx);
            return std::min(w1, w2);
        };

    Spectrum prev;
    for (std::size_t k = 0; k < values.size(); ++k) {
        Spectrum s = solve(values[k]);
        if (k > 0) {
            const double worst = advance(prev, values[k - 1], s, values[k], current);
            if (worst < 0.5)
                tr.warnings[k].push_back("tracking lost (overlap " + std::to_string(worst) + ")");
        }
        for (std::size_t q = 0; q < pairs.size(); ++q) {
            const int la = static_cast<int>(std::lower_bound(labels.begin(), labels.end(), pairs[q].first) - labels.begin());
            const int lb = static_cast<int>(std::lower_bound(labels.begin(), labels.end(), pairs[q].second) - labels.begin());
            const int ia = current[la];
            const int ib = current[lb];
            tr.tracked[q][k] = {ia, ib};
            tr.gaps[q][k] = std::abs(s.energies(ia) - s.energies(ib));
        }
        prev = std::move(s);
    }
    return tr;
}

double ilas(const Spectrum& spec, int n_cff)
{
    if (n_cff < 1) throw InvalidArgument("n_cff must be positive");
    if (n_cff + 1 > spec.size()) throw InvalidArgument("n_cff + 1 exceeds the retained levels");
    double sum = 0.0;
    for (int n = 0; n < n_cff; ++n) {
        const double gap = spec.energies(n + 1) - spec.energies(n);
        if (gap <= 0.0) continue;
        const double lg = std::abs(std::log(gap));
        sum += lg < 1e-3 ? 1e3 : 1.0 / lg;
    }
    return sum;
}

int default_n_cff(double eps2)
{
    return 2 * static_cast<int>(std::ceil(std::max(eps2, 0.0))) + 6;
}

} // namespace kerrwell
