#include "kerrwell/semiclassics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <unsupported/Eigen/Polynomials>

namespace kerrwell {

namespace {

constexpr double pi = 3.14159265358979323846;

double poly_eval(const std::array<double, 5>& c, double t)
{
    return (((c[4] * t + c[3]) * t + c[2]) * t + c[1]) * t + c[0];
}

double poly_deriv(const std::array<double, 5>& c, double t)
{
    return ((4.0 * c[4] * t + 3.0 * c[3]) * t + 2.0 * c[2]) * t + c[1];
}

// real roots of the quartic (or lower, after trimming negligible leading terms), ascending
std::vector<double> real_roots(const std::array<double, 5>& c)
{
    double scale = 0.0;
    for (double v : c) scale = std::max(scale, std::abs(v));
    int deg = 4;
    while (deg > 0 && std::abs(c[deg]) <= 1e-13 * scale) --deg;
    std::vector<double> out;
    if (deg == 0) return out;
    Eigen::VectorXd coeffs(deg + 1);
    for (int k = 0; k <= deg; ++k) coeffs(k) = c[k];
    Eigen::PolynomialSolver<double, Eigen::Dynamic> solver;
    solver.compute(coeffs);
    for (Eigen::Index k = 0; k < solver.roots().size(); ++k) {
        const std::complex<double> r = solver.roots()(k);
        if (std::abs(r.imag()) > 1e-7 * (1.0 + std::abs(r.real()))) continue;
        double t = r.real();
        // Newton polish, kept only while it improves the residual
        for (int it = 0; it < 4; ++it) {
            const double d = poly_deriv(c, t);
            if (d == 0.0) break;
            const double tn = t - poly_eval(c, t) / d;
            if (std::abs(poly_eval(c, tn)) >= std::abs(poly_eval(c, t))) break;
            t = tn;
        }
        out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    return out;
}

template <class F>
double integrate(F f, double a, double b, double tol)
{
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 10, tol, &err);
}

struct LobeGeometry {
    ModelParams p;
    PhasePoint minimum;
    PhasePoint saddle;
    double qs = 0.0;
};

LobeGeometry geometry(const ModelParams& p, Well w)
{
    ClassicalLandscape land = analyze_landscape(p);
    LobeGeometry g;
    g.p = p;
    g.minimum = w == Well::shallow ? land.shallow : land.deep;
    g.saddle = land.saddle;
    g.qs = land.saddle.q;
    return g;
}

// Green's theorem in polar form around the minimum: area = 1/2 \oint r^2 dtheta
double area_contour(const LobeGeometry& g)
{
    const double ts = std::atan2(g.saddle.p - g.minimum.p, g.saddle.x - g.minimum.x);
    auto radius = [&](double th) {
        std::array<double, 5> c = classical_on_line(g.p, g.minimum.x, g.minimum.p, std::cos(th), std::sin(th));
        c[0] -= g.qs;
        for (double t : real_roots(c))
            if (t > 0.0) return t;
        throw ConsistencyError("lobe boundary not found along a ray");
    };
    return integrate([&](double th) {
        const double r = radius(th);
        return 0.5 * r * r;
    }, ts, ts + 2.0 * pi, 1e-12);
}

// chords perpendicular to the unstable direction at the saddle, integrated along it
double area_sweep(const LobeGeometry& g)
{
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(classical_hessian(g.p, g.saddle.x, g.saddle.p));
    Eigen::Vector2d u = es.eigenvectors().col(0);  // negative curvature
    const Eigen::Vector2d to_min(g.minimum.x - g.saddle.x, g.minimum.p - g.saddle.p);
    if (u.dot(to_min) < 0.0) u = -u;
    const Eigen::Vector2d w(-u(1), u(0));

    auto chord = [&](double s) {
        const double x0 = g.saddle.x + s * u(0);
        const double p0 = g.saddle.p + s * u(1);
        std::array<double, 5> c = classical_on_line(g.p, x0, p0, w(0), w(1));
        c[0] -= g.qs;
        std::vector<double> r = real_roots(c);
        double len = 0.0;
        for (std::size_t k = 0; k + 1 < r.size(); ++k) {
            const double mid = 0.5 * (r[k] + r[k + 1]);
            if (poly_eval(c, mid) < 0.0) len += r[k + 1] - r[k];
        }
        return len;
    };

    const double reach = to_min.norm();
    double lo = 0.0;
    double hi = reach;
    while (chord(hi) > 0.0) {
        lo = hi;
        hi += 0.25 * reach;
        if (hi > 100.0 * reach) throw ConsistencyError("lobe extent not bracketed");
    }
    if (lo == 0.0) lo = 0.5 * reach;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (chord(mid) > 0.0) lo = mid;
        else hi = mid;
    }
    const double smax = 0.5 * (lo + hi);
    // s = smax (1 - v^2) removes the square-root edge at the far tip
    return integrate([&](double v) { return chord(smax * (1.0 - v * v)) * 2.0 * smax * v; }, 0.0, 1.0, 1e-12);
}

} // namespace

LobeArea lobe_area(const ModelParams& p, Well w)
{
    LobeGeometry g = geometry(p, w);
    LobeArea a;
    a.area_sweep = area_sweep(g);
    a.area_contour = area_contour(g);
    const double rel = std::abs(a.area_sweep - a.area_contour) / std::max(std::abs(a.area_contour), 1e-300);
    if (rel > 1e-5)
        throw ConsistencyError("lobe area methods disagree (relative " + std::to_string(rel) + ")");
    a.action = a.area_sweep / (2.0 * pi);
    return a;
}

double lobe_action(const ModelParams& p, Well w)
{
    return lobe_area(p, w).action;
}

double separatrix_action(const ModelParams& p)
{
    return lobe_action(p, Well::shallow) + lobe_action(p, Well::deep);
}

int ebk_orbit_count(double action)
{
    if (!(action >= 0.5)) return 0;
    return static_cast<int>(std::floor(action + 0.5));
}

namespace {

// smallest eps2 with two minima at the given drive
double bistable_eps2_floor(double eps1, double phi)
{
    auto bistable = [&](double e2) { return is_bistable(ModelParams::kpo(eps1, e2, phi)); };
    if (eps1 == 0.0) return 0.0;
    double hi = 1.0;
    while (!bistable(hi)) hi *= 2.0;
    double lo = 0.0;
    while (hi - lo > 1e-10 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (bistable(mid)) hi = mid;
        else lo = mid;
    }
    return hi;
}

template <class F>
double bracketed_root(F f, double a, double b, double fa, double fb, double tol)
{
    boost::uintmax_t iters = 200;
    auto stop = [tol](double l, double r) { return std::abs(r - l) <= tol; };
    auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, stop, iters);
    return 0.5 * (r.first + r.second);
}

} // namespace

EBKCurve ebk_curve(int n_quantum, Well well, const std::vector<double>& eps2_values, double phi)
{
    if (n_quantum < 0) throw InvalidArgument("quantum number must be non-negative");
    EBKCurve curve;
    curve.n = n_quantum;
    curve.well = well;
    curve.phi = phi;
    const double target = n_quantum + 0.5;
    for (double e2 : eps2_values) {
        try {
            auto f = [&](double e1) { return lobe_action(ModelParams::kpo(e1, e2, phi), well) - target; };
            const double boundary = bistability_boundary(ModelParams::kpo(0.0, e2, phi));
            const double hi = boundary * (1.0 - 1e-4);
            const double f0 = f(0.0);
            if (std::abs(f0) < 1e-12) {
                curve.points.push_back({0.0, e2});
                continue;
            }
            const double fh = f(hi);
            if (f0 * fh > 0.0) {
                curve.omitted_eps2.push_back(e2);
                continue;
            }
            curve.points.push_back({bracketed_root(f, 0.0, hi, f0, fh, 1e-9), e2});
        } catch (const NumericalFailure&) {
            curve.omitted_eps2.push_back(e2);
        }
    }
    return curve;
}

double ebk_eps2(int n_quantum, Well well, double eps1, double lo, double hi, double phi)
{
    const double target = n_quantum + 0.5;
    lo = std::max(lo, bistable_eps2_floor(eps1, phi) * (1.0 + 1e-6));
    if (!(hi > lo)) return std::numeric_limits<double>::quiet_NaN();
    auto f = [&](double e2) { return lobe_action(ModelParams::kpo(eps1, e2, phi), well) - target; };
    const double flo = f(lo);
    const double fhi = f(hi);
    if (flo * fhi > 0.0) return std::numeric_limits<double>::quiet_NaN();
    return bracketed_root(f, lo, hi, flo, fhi, 1e-9);
}

double resonance_parabola(int n, double eps1)
{
    if (n < 1) throw InvalidArgument("resonance index must be at least 1");
    const double r = eps1 / n;
    return r * r;
}

std::vector<TripleIntersection> triple_intersections(int n_max, int m_max, double eps2_lo, double eps2_hi)
{
    if (n_max < 1 || m_max < 0 || !(eps2_hi > eps2_lo)) throw InvalidArgument("empty search range");
    std::vector<TripleIntersection> out;
    for (int n = 1; n <= n_max; ++n) {
        auto g = [&](double e2) { return lobe_action(ModelParams::kpo(n * std::sqrt(e2), e2), Well::shallow) - (n + 0.5); };
        double prev_x = std::numeric_limits<double>::quiet_NaN();
        double prev_g = 0.0;
        for (double e2 = eps2_lo; e2 <= eps2_hi + 1e-12; e2 += 0.05) {
            double gv;
            try {
                if (!is_bistable(ModelParams::kpo(n * std::sqrt(e2), e2))) throw BistabilityLost("", 0.0);
                gv = g(e2);
            } catch (const NumericalFailure&) {
                prev_x = std::numeric_limits<double>::quiet_NaN();
                continue;
            }
            if (!std::isnan(prev_x) && prev_g * gv <= 0.0 && prev_g != gv) {
                const double root = bracketed_root(g, prev_x, e2, prev_g, gv, 1e-9);
                const double e1 = n * std::sqrt(root);
                const double deep = lobe_action(ModelParams::kpo(e1, root), Well::deep);
                const int guess = static_cast<int>(std::lround(deep - 0.5));
                double best = std::numeric_limits<double>::infinity();
                int best_m = -1;
                for (int m = std::max(0, guess - 1); m <= std::min(m_max, guess + 1); ++m) {
                    const double e2m = ebk_eps2(m, Well::deep, e1, root - 1.0, root + 1.0);
                    if (std::isnan(e2m)) continue;
                    if (std::abs(e2m - root) < best) {
                        best = std::abs(e2m - root);
                        best_m = m;
                    }
                }
                if (best_m >= 0 && best < 0.1) out.push_back({n, best_m, e1, root, best});
            }
            prev_x = e2;
            prev_g = gv;
        }
    }
    return out;
}

RabiFrequency rabi_frequency(double eps1, double eps2)
{
    if (eps2 < 0.0) throw InvalidArgument("eps2 must be non-negative");
    RabiFrequency r;
    if (eps2 >= 1.0) {
        r.value = 4.0 * eps1 * std::sqrt(eps2);
    } else if (eps2 == 0.0) {
        r.value = 2.0 * eps1;
    } else {
        r.value = (1.0 - eps2) * 2.0 * eps1 + eps2 * 4.0 * eps1 * std::sqrt(eps2);
        r.heuristic = true;
    }
    return r;
}

} // namespace kerrwell
