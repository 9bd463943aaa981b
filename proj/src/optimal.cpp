#include "kerrwell/orchestrator.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace kerrwell {

namespace {

struct Objective {
    ModelParams base;
    Axis drive;
    const SolverSettings& solver;
    const DissipationParams& d;
    std::map<double, double> cache;

    // NaN when the point cannot be evaluated
    double operator()(double x)
    {
        auto it = cache.find(x);
        if (it != cache.end()) return it->second;
        double T = std::numeric_limits<double>::quiet_NaN();
        try {
            T = dynamics_point(with_axis(base, drive, x), solver, d).T;
        } catch (const NumericalFailure&) {
        }
        cache.emplace(x, T);
        return T;
    }
};

bool better(double a, double b)
{
    return std::isfinite(a) && (!std::isfinite(b) || a > b);
}

} // namespace

OptimalAsymmetryCurve optimal_asymmetry(const std::vector<double>& eps2_values, std::pair<double, double> eps1_range,
                                        const DissipationParams& d, const OptimalAsymmetryOptions& opt)
{
    d.validate();
    const auto [lo, hi] = eps1_range;
    if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw InvalidArgument("search range must be ordered");
    if (!(opt.step > 0.0) || !(opt.tol > 0.0)) throw InvalidArgument("step and tolerance must be positive");
    const bool chemical = opt.base.family == ModelFamily::chemical;
    const Axis drive = chemical ? Axis::k1 : Axis::eps1;
    const Axis depth = chemical ? Axis::k2 : Axis::eps2;

    // grid on multiples of the step, with 0 forced in so the symmetric point is always compared
    std::vector<double> grid;
    const long first = static_cast<long>(std::ceil(lo / opt.step - 1e-9));
    const long last = static_cast<long>(std::floor(hi / opt.step + 1e-9));
    for (long k = first; k <= last; ++k) grid.push_back(k * opt.step);
    if (grid.empty() || grid.front() > lo + 1e-12) grid.insert(grid.begin(), lo);
    if (grid.back() < hi - 1e-12) grid.push_back(hi);
    bool has_zero = false;
    for (double& g : grid) {
        if (std::abs(g) < 1e-12) {
            g = 0.0;
            has_zero = true;
        }
    }

    OptimalAsymmetryCurve curve;
    curve.points.resize(eps2_values.size());
    const int workers = opt.workers > 0 ? opt.workers : default_workers();
    parallel_for(eps2_values.size(), workers, [&](std::size_t i) {
        OptimalAsymmetryPoint& pt = curve.points[i];
        pt.eps2 = eps2_values[i];
        Objective f{with_axis(opt.base, depth, pt.eps2), drive, opt.solver, d, {}};

        pt.T_symmetric = f(0.0);
        if (!has_zero) pt.T_symmetric = std::numeric_limits<double>::quiet_NaN();
        std::size_t best = grid.size();
        double best_T = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const double T = f(grid[k]);
            if (better(T, best_T)) {
                best_T = T;
                best = k;
            }
        }
        if (best == grid.size()) {
            pt.ok = false;
            pt.error = "every grid point failed";
            pt.eps1_star = pt.T_star = std::numeric_limits<double>::quiet_NaN();
            return;
        }

        // golden-section refinement between the neighbours of the best grid point
        double a = grid[best > 0 ? best - 1 : best];
        double b = grid[best + 1 < grid.size() ? best + 1 : best];
        const double r = (std::sqrt(5.0) - 1.0) / 2.0;
        double x1 = b - r * (b - a);
        double x2 = a + r * (b - a);
        double f1 = f(x1);
        double f2 = f(x2);
        while (b - a > opt.tol) {
            if (better(f1, f2) || (!std::isfinite(f1) && !std::isfinite(f2))) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - r * (b - a);
                f1 = f(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + r * (b - a);
                f2 = f(x2);
            }
        }
        pt.eps1_star = grid[best];
        pt.T_star = best_T;
        for (const auto& [x, T] : f.cache) {
            if (better(T, pt.T_star)) {
                pt.T_star = T;
                pt.eps1_star = x;
            }
        }
    });
    return curve;
}

} // namespace kerrwell
