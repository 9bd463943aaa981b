#include "kerrwell/semiclassics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace kerrwell {

std::string well_name(Well w)
{
    return w == Well::shallow ? "shallow" : "deep";
}

double classical_hamiltonian(const ModelParams& p, double x, double mom)
{
    if (p.family == ModelFamily::chemical) {
        const double x2 = x * x;
        return 0.5 * mom * mom + x2 * x2 - p.k2 * x2 + p.k1 * x;
    }
    const double e1 = p.drive1();
    const double e2 = p.drive2();
    const double r2 = x * x + mom * mom;
    return 0.25 * r2 * r2 - e2 * (x * x - mom * mom) -
           std::sqrt(2.0) * e1 * (x * std::cos(p.phi) - mom * std::sin(p.phi));
}

Eigen::Vector2d classical_gradient(const ModelParams& p, double x, double mom)
{
    if (p.family == ModelFamily::chemical)
        return {4.0 * x * x * x - 2.0 * p.k2 * x + p.k1, mom};
    const double e1 = p.drive1();
    const double e2 = p.drive2();
    const double r2 = x * x + mom * mom;
    return {x * r2 - 2.0 * e2 * x - std::sqrt(2.0) * e1 * std::cos(p.phi),
            mom * r2 + 2.0 * e2 * mom + std::sqrt(2.0) * e1 * std::sin(p.phi)};
}

Eigen::Matrix2d classical_hessian(const ModelParams& p, double x, double mom)
{
    Eigen::Matrix2d h;
    if (p.family == ModelFamily::chemical) {
        h << 12.0 * x * x - 2.0 * p.k2, 0.0, 0.0, 1.0;
        return h;
    }
    const double e2 = p.drive2();
    h << 3.0 * x * x + mom * mom - 2.0 * e2, 2.0 * x * mom,
         2.0 * x * mom, x * x + 3.0 * mom * mom + 2.0 * e2;
    return h;
}

std::array<double, 5> classical_on_line(const ModelParams& p, double x0, double p0, double dx, double dp)
{
    std::array<double, 5> c{};
    if (p.family == ModelFamily::chemical) {
        c[0] = 0.5 * p0 * p0 + std::pow(x0, 4) - p.k2 * x0 * x0 + p.k1 * x0;
        c[1] = p0 * dp + 4.0 * std::pow(x0, 3) * dx - 2.0 * p.k2 * x0 * dx + p.k1 * dx;
        c[2] = 0.5 * dp * dp + 6.0 * x0 * x0 * dx * dx - p.k2 * dx * dx;
        c[3] = 4.0 * x0 * std::pow(dx, 3);
        c[4] = std::pow(dx, 4);
        return c;
    }
    const double e1 = p.drive1();
    const double e2 = p.drive2();
    const double a0 = x0 * x0 + p0 * p0;
    const double a1 = 2.0 * (x0 * dx + p0 * dp);
    const double a2 = dx * dx + dp * dp;
    const double b0 = x0 * x0 - p0 * p0;
    const double b1 = 2.0 * (x0 * dx - p0 * dp);
    const double b2 = dx * dx - dp * dp;
    const double s = std::sqrt(2.0) * e1;
    const double cs = std::cos(p.phi);
    const double sn = std::sin(p.phi);
    c[0] = 0.25 * a0 * a0 - e2 * b0 - s * (x0 * cs - p0 * sn);
    c[1] = 0.5 * a0 * a1 - e2 * b1 - s * (dx * cs - dp * sn);
    c[2] = 0.25 * (a1 * a1 + 2.0 * a0 * a2) - e2 * b2;
    c[3] = 0.5 * a1 * a2;
    c[4] = 0.25 * a2 * a2;
    return c;
}

namespace {

double length_scale(const ModelParams& p)
{
    if (p.family == ModelFamily::chemical) return std::max(1.0, std::sqrt(std::max(p.k2, 0.0) / 2.0));
    return std::max(1.0, std::sqrt(2.0 * std::max(p.drive2(), 0.0)));
}

bool newton_critical(const ModelParams& p, Eigen::Vector2d& z)
{
    auto merit = [&](const Eigen::Vector2d& v) { return classical_gradient(p, v(0), v(1)).squaredNorm(); };
    const double scale = length_scale(p);
    for (int it = 0; it < 200; ++it) {
        Eigen::Vector2d g = classical_gradient(p, z(0), z(1));
        const double gn = g.norm();
        const double gscale = 1.0 + std::pow(scale, 3) + std::abs(p.drive1()) + std::abs(p.k1);
        if (gn < 1e-13 * gscale) return true;
        Eigen::Matrix2d h = classical_hessian(p, z(0), z(1));
        Eigen::Vector2d step;
        if (std::abs(h.determinant()) > 1e-14 * (1.0 + h.squaredNorm())) step = -h.inverse() * g;
        else step = -g / (1.0 + h.norm());
        const double cap = 0.5 * scale;
        if (step.norm() > cap) step *= cap / step.norm();
        const double m0 = merit(z);
        double lam = 1.0;
        Eigen::Vector2d trial = z + step;
        while (merit(trial) > m0 && lam > 1e-6) {
            lam *= 0.5;
            trial = z + lam * step;
        }
        if ((trial - z).norm() < 1e-15 * scale) return gn < 1e-9 * gscale;
        z = trial;
    }
    return classical_gradient(p, z(0), z(1)).norm() < 1e-9 * (1.0 + std::pow(scale, 3));
}

} // namespace

std::vector<CriticalPoint> critical_points(const ModelParams& p)
{
    p.validate();
    const double s = length_scale(p);
    const std::vector<Eigen::Vector2d> seeds = {
        {s, 0.0}, {-s, 0.0}, {0.0, 0.0}, {0.5 * s, 0.0}, {-0.5 * s, 0.0},
        {1.5 * s, 0.0}, {-1.5 * s, 0.0}, {0.0, 0.5 * s}, {0.0, -0.5 * s}};

    std::vector<CriticalPoint> out;
    for (Eigen::Vector2d z : seeds) {
        if (!newton_critical(p, z)) continue;
        bool dup = false;
        for (const CriticalPoint& c : out)
            if (std::hypot(c.point.x - z(0), c.point.p - z(1)) < 1e-7 * s) dup = true;
        if (dup) continue;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(classical_hessian(p, z(0), z(1)));
        const double hs = es.eigenvalues().cwiseAbs().maxCoeff();
        CriticalPoint c;
        c.point = {z(0), z(1), classical_hamiltonian(p, z(0), z(1))};
        for (int k = 0; k < 2; ++k)
            if (es.eigenvalues()(k) < -1e-10 * hs) ++c.negative_curvatures;
        // a vanishing curvature marks a merging pair, not a proper extremum
        if (es.eigenvalues().cwiseAbs().minCoeff() <= 1e-10 * hs) continue;
        out.push_back(c);
    }
    std::sort(out.begin(), out.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
        return a.point.x < b.point.x || (a.point.x == b.point.x && a.point.p < b.point.p);
    });
    return out;
}

static int count_minima(const ModelParams& p)
{
    int n = 0;
    for (const CriticalPoint& c : critical_points(p))
        if (c.negative_curvatures == 0) ++n;
    return n;
}

bool is_bistable(const ModelParams& p)
{
    int minima = 0;
    int saddles = 0;
    for (const CriticalPoint& c : critical_points(p)) {
        if (c.negative_curvatures == 0) ++minima;
        else if (c.negative_curvatures == 1) ++saddles;
    }
    return minima == 2 && saddles > 0;
}

double bistability_boundary(const ModelParams& p)
{
    ModelParams q = p;
    const bool chem = p.family == ModelFamily::chemical;
    auto set = [&](double v) {
        if (chem) q.k1 = v;
        else q.eps1 = v;
    };
    set(0.0);
    if (count_minima(q) < 2) return 0.0;
    double lo = 0.0;
    double hi = 1.0;
    set(hi);
    while (count_minima(q) >= 2) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) return std::numeric_limits<double>::infinity();
        set(hi);
    }
    while (hi - lo > 1e-10 * hi) {
        const double mid = 0.5 * (lo + hi);
        set(mid);
        if (count_minima(q) >= 2) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

ClassicalLandscape analyze_landscape(const ModelParams& p)
{
    std::vector<CriticalPoint> cps = critical_points(p);
    std::vector<PhasePoint> minima;
    std::vector<PhasePoint> saddles;
    for (const CriticalPoint& c : cps) {
        if (c.negative_curvatures == 0) minima.push_back(c.point);
        else if (c.negative_curvatures == 1) saddles.push_back(c.point);
    }
    if (minima.size() != 2 || saddles.empty()) {
        const double b = bistability_boundary(p);
        throw BistabilityLost("landscape is not bistable (boundary at drive " + std::to_string(b) + ")", b);
    }

    ClassicalLandscape land;
    land.params = p;
    const double qscale = 1.0 + std::abs(minima[0].q) + std::abs(minima[1].q);
    const PhasePoint& a = minima[0];  // smaller x
    const PhasePoint& b = minima[1];
    if (std::abs(a.q - b.q) <= 1e-12 * qscale) {
        land.shallow = a;
        land.deep = b;
    } else if (a.q > b.q) {
        land.shallow = a;
        land.deep = b;
    } else {
        land.shallow = b;
        land.deep = a;
    }
    // the saddle joining the wells is the lowest one
    land.saddle = *std::min_element(saddles.begin(), saddles.end(),
                                    [](const PhasePoint& u, const PhasePoint& v) { return u.q < v.q; });
    land.well_minima = {land.shallow, land.deep};
    land.asymmetry_A = land.shallow.q - land.deep.q;
    land.barrier_shallow = land.saddle.q - land.shallow.q;
    land.barrier_deep = land.saddle.q - land.deep.q;
    land.omega_shallow = std::sqrt(std::max(0.0, classical_hessian(p, land.shallow.x, land.shallow.p).determinant()));
    land.omega_deep = std::sqrt(std::max(0.0, classical_hessian(p, land.deep.x, land.deep.p).determinant()));
    if (std::min(land.barrier_shallow, land.barrier_deep) <= 1e-9 * qscale) {
        // a saddle level with a minimum only happens where the pair merges
        if (std::min(land.barrier_shallow, land.barrier_deep) >= -1e-9 * qscale) {
            const double b = bistability_boundary(p);
            throw BistabilityLost("landscape is at its bistability edge", b);
        }
        throw ConsistencyError("saddle lies below a well minimum");
    }
    return land;
}

} // namespace kerrwell
