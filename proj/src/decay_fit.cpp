#include "kerrwell/dynamics.hpp"

#include <cmath>

#include <unsupported/Eigen/LevenbergMarquardt>

namespace kerrwell {

namespace {

// P(t) = O + (P0 - O) exp(-t / T), parameterized by (log T, O)
struct DecayResidual : Eigen::DenseFunctor<double> {
    const std::vector<double>& t;
    const std::vector<double>& y;
    double p0;

    DecayResidual(const std::vector<double>& times, const std::vector<double>& values, double start)
        : Eigen::DenseFunctor<double>(2, static_cast<int>(times.size())), t(times), y(values), p0(start) {}

    int operator()(const InputType& x, ValueType& f) const
    {
        const double T = std::exp(x(0));
        for (std::size_t k = 0; k < t.size(); ++k)
            f(k) = x(1) + (p0 - x(1)) * std::exp(-t[k] / T) - y[k];
        return 0;
    }

    int df(const InputType& x, JacobianType& j) const
    {
        const double T = std::exp(x(0));
        for (std::size_t k = 0; k < t.size(); ++k) {
            const double e = std::exp(-t[k] / T);
            j(k, 0) = (p0 - x(1)) * e * t[k] / T;
            j(k, 1) = 1.0 - e;
        }
        return 0;
    }
};

} // namespace

DecayFit activation_time_fit(const Trajectory& traj)
{
    const std::vector<double>& t = traj.times;
    const std::vector<double>& y = traj.shallow_population;
    if (t.size() != y.size() || t.size() < 3) throw InvalidArgument("trajectory needs at least 3 samples");

    const double p0 = y.front();
    double change = 0.0;
    for (double v : y) change = std::max(change, std::abs(v - p0));
    if (change < 1e-3) throw NoDecay("population changes by less than 1e-3");

    const double o0 = y.back();
    const double half = o0 + 0.5 * (p0 - o0);
    double t_half = t.back() / 2.0;
    for (std::size_t k = 1; k < t.size(); ++k) {
        if ((y[k - 1] - half) * (y[k] - half) <= 0.0 && y[k] != y[k - 1]) {
            t_half = t[k - 1] + (half - y[k - 1]) * (t[k] - t[k - 1]) / (y[k] - y[k - 1]);
            break;
        }
    }
    const double T0 = std::max(t_half, 1e-12) / std::log(2.0);

    DecayResidual fn(t, y, p0);
    Eigen::LevenbergMarquardt<DecayResidual> lm(fn);
    lm.setFtol(1e-14);
    lm.setXtol(1e-14);
    lm.setMaxfev(2000);
    Eigen::VectorXd x(2);
    x << std::log(T0), o0;
    lm.minimize(x);

    DecayFit fit;
    fit.method = DecayMethod::fit;
    fit.T = std::exp(x(0));
    fit.O = x(1);
    Eigen::VectorXd r(static_cast<Eigen::Index>(t.size()));
    fn(x, r);
    fit.rmse = std::sqrt(r.squaredNorm() / static_cast<double>(t.size()));
    if (!std::isfinite(fit.T) || !(fit.T > 0.0)) throw NumericalFailure("decay fit diverged");
    if (t.back() < 3.0 * fit.T)
        fit.warnings.push_back("trajectory spans less than 3 T (" + std::to_string(t.back() / fit.T) + " T)");
    return fit;
}

} // namespace kerrwell
