// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "kerrwell/dynamics.hpp"
#include "kerrwell/orchestrator.hpp"
#include "kerrwell/semiclassics.hpp"
#include "kerrwell/spectra.hpp"

using namespace kerrwell;

namespace {

constexpr double pi = 3.14159265358979323846;
const DissipationParams bath{0.025, 0.05};

int failures = 0;

class Stopwatch {
public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void report(int id, const std::string& name, bool ok, const std::string& detail, double seconds)
{
    if (!ok) ++failures;
    std::printf("%s %2d %-34s | %s | %.1f s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::vector<double> linspace(double a, double b, int n)
{
    std::vector<double> v(n);
    for (int k = 0; k < n; ++k) v[k] = a + (b - a) * k / (n - 1);
    return v;
}

// memoized activation time along one cut
class Cut {
public:
    explicit Cut(std::function<ModelParams(double)> at, int dim = 0) : at_(std::move(at)), dim_(dim) {}

    double T(double x)
    {
        auto it = cache_.find(x);
        if (it != cache_.end()) return it->second;
        SolverSettings s;
        s.dim = dim_;
        const double t = dynamics_point(at_(x), s, bath).T;
        cache_.emplace(x, t);
        return t;
    }

private:
    std::function<ModelParams(double)> at_;
    int dim_;
    std::map<double, double> cache_;
};

struct Dip {
    double x = 0.0;
    double T = 0.0;
    // neighbouring maxima of T bounding the dip
    double left = 0.0;
    double right = 0.0;
    double width = std::numeric_limits<double>::quiet_NaN();
};

// grid minima refined by Brent's method inside the neighbouring grid cells
std::vector<Dip> find_dips(Cut& cut, const std::vector<double>& grid)
{
    std::vector<double> t(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) t[k] = cut.T(grid[k]);

    std::vector<std::size_t> maxima;
    if (t[0] > t[1]) maxima.push_back(0);
    for (std::size_t k = 1; k + 1 < t.size(); ++k)
        if (t[k] > t[k - 1] && t[k] >= t[k + 1]) maxima.push_back(k);
    if (t.back() > t[t.size() - 2]) maxima.push_back(t.size() - 1);

    std::vector<Dip> dips;
    for (std::size_t k = 1; k + 1 < t.size(); ++k) {
        if (!(t[k] < t[k - 1] && t[k] <= t[k + 1])) continue;
        auto res = boost::math::tools::brent_find_minima([&](double x) { return cut.T(x); }, grid[k - 1], grid[k + 1], 30);
        Dip d;
        d.x = res.first;
        d.T = res.second;
        d.left = grid.front();
        d.right = grid.back();
        for (std::size_t m : maxima) {
            if (m < k) d.left = grid[m];
            if (m > k) {
                d.right = grid[m];
                break;
            }
        }
        dips.push_back(d);
    }
    return dips;
}

// full width at half prominence of the 1/T peak; the higher of the two bases sets the reference
void measure_width(Cut& cut, Dip& d)
{
    const double peak = 1.0 / d.T;
    const double base = std::max(1.0 / cut.T(d.left), 1.0 / cut.T(d.right));
    const double half = 0.5 * (peak + base);
    auto g = [&](double x) { return 1.0 / cut.T(x) - half; };
    boost::math::tools::eps_tolerance<double> tol(24);
    std::uintmax_t iters = 60;
    auto l = boost::math::tools::toms748_solve(g, d.left, d.x, tol, iters);
    iters = 60;
    auto r = boost::math::tools::toms748_solve(g, d.x, d.right, tol, iters);
    d.width = 0.5 * (r.first + r.second) - 0.5 * (l.first + l.second);
}

// consecutive width differences change sign at every step
bool alternating(const std::vector<double>& w)
{
    if (w.size() < 3) return false;
    for (std::size_t k = 2; k < w.size(); ++k) {
        const double a = w[k - 1] - w[k - 2];
        const double b = w[k] - w[k - 1];
        if (!(a * b < 0.0)) return false;
    }
    return true;
}

std::string list(const std::vector<double>& v, const char* f = "%.3f")
{
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? " " : "") + fmt(f, v[k]);
    return s;
}

Cut kpo_cut(double eps2, double phi = 0.0)
{
    return Cut([=](double e1) { return ModelParams::kpo(e1, eps2, phi); });
}

} // namespace

int main()
{
    Stopwatch total;

    // 1. resonance locations along eps2 = 7.7
    Cut c77 = kpo_cut(7.7);
    std::vector<Dip> dips77;
    {
        Stopwatch sw;
        dips77 = find_dips(c77, linspace(0.0, 12.5, 80));
        bool ok = true;
        std::vector<double> found;
        for (int n = 1; n <= 3; ++n) {
            const double target = n * std::sqrt(7.7);
            double best = std::numeric_limits<double>::infinity();
            for (const Dip& d : dips77)
                if (std::abs(d.x - target) < std::abs(best - target)) best = d.x;
            found.push_back(best);
            ok = ok && std::abs(best - target) <= 0.05 * target;
        }
        const double secs = sw.seconds();
        ok = ok && secs <= 300.0;
        report(1, "resonance locations", ok,
               "minima " + list(found) + " vs n sqrt(7.7) = " + list({std::sqrt(7.7), 2 * std::sqrt(7.7), 3 * std::sqrt(7.7)}) +
                   " (5%)",
               secs);
    }

    // 2. alternating widths of the first four 1/T peaks
    {
        Stopwatch sw;
        std::vector<double> widths;
        for (std::size_t k = 0; k < dips77.size() && k < 4; ++k) {
            measure_width(c77, dips77[k]);
            widths.push_back(dips77[k].width);
        }
        const bool ok = widths.size() == 4 && alternating(widths);
        report(2, "alternating resonance widths", ok, "FWHM n=1..4: " + list(widths, "%.4f"), sw.seconds());
    }

    // 3. optimal asymmetry
    {
        Stopwatch sw;
        OptimalAsymmetryOptions o;
        o.workers = default_workers();
        const std::vector<double> depths = {6.0, 7.7, 10.0};
        OptimalAsymmetryCurve c = optimal_asymmetry(depths, {0.0, 1.8}, bath, o);
        double best_gain = 0.0;
        double star77 = std::numeric_limits<double>::quiet_NaN();
        std::vector<double> gains;
        for (const OptimalAsymmetryPoint& p : c.points) {
            if (!p.ok) continue;
            const double gain = p.T_star / p.T_symmetric;
            gains.push_back(gain);
            if (p.eps2 >= 6.0 && p.eps2 <= 10.0) best_gain = std::max(best_gain, gain);
            if (p.eps2 == 7.7) star77 = p.eps1_star;
        }
        const bool ok = best_gain >= 1.5 && std::abs(star77 - 1.0) <= 0.3;
        report(3, "optimal asymmetry", ok,
               "T*/T(0) at eps2 6, 7.7, 10: " + list(gains, "%.2f") + "; eps1* at 7.7 = " + fmt("%.3f", star77),
               sw.seconds());
    }

    // 4. degeneracy of the tracked excited pair along the symmetric cut
    {
        Stopwatch sw;
        const std::vector<double> e2 = linspace(0.0, 15.0, 151);
        GapTraceOptions opt;
        opt.dim = default_kpo_dim(15.0);
        GapTrace g = gap_trace(ModelParams::kpo(0.0, 0.0), Axis::eps2, e2, {{0, 1}, {4, 5}, {6, 7}}, opt);
        double ground = 0.0;
        double window = 0.0;
        double at8 = 0.0;
        double next12 = 0.0;
        for (std::size_t k = 0; k < e2.size(); ++k) {
            if (e2[k] >= 6.0 - 1e-9) ground = std::max(ground, g.gaps[0][k]);
            if (std::abs(e2[k] - 8.0) < 1e-9) at8 = g.gaps[1][k];
            if (e2[k] >= 11.5 - 1e-9 && e2[k] <= 12.5 + 1e-9) window = std::max(window, g.gaps[1][k]);
            if (std::abs(e2[k] - 12.0) < 1e-9) next12 = g.gaps[2][k];
        }
        const bool ok = window < 0.05 && at8 > 0.5 && ground < 1e-6;
        report(4, "spectral degeneracy", ok,
               "gap(4,5) max on [11.5,12.5] " + fmt("%.3g", window) + ", at 8 " + fmt("%.3f", at8) +
                   "; gap(6,7) at 12 " + fmt("%.3f", next12) + "; ground doublet max for eps2>=6 " + fmt("%.2g", ground),
               sw.seconds());
    }

    // 5. doublets below the saddle against EBK orbit counts
    {
        Stopwatch sw;
        bool ok = true;
        std::string detail;
        for (double e2 : {4.0, 6.0, 8.0, 10.0, 12.0}) {
            const ModelParams p = ModelParams::kpo(0.0, e2);
            const double saddle = analyze_landscape(p).saddle.q;
            Spectrum s = eigensystem(build_hamiltonian(p));
            int below = 0;
            for (int k = 0; k < s.size(); ++k) below += s.energies(k) < saddle ? 1 : 0;
            const int quantum = below / 2;
            const int ebk = ebk_orbit_count(lobe_action(p, Well::shallow));
            ok = ok && std::abs(quantum - ebk) <= 1;
            detail += fmt("%.0f:", e2) + std::to_string(quantum) + "/" + std::to_string(ebk) + " ";
        }
        report(5, "EBK/quantum doublet count", ok, "eps2: quantum/EBK " + detail, sw.seconds());
    }

    // 6. A = n S from the landscape against the parabolas
    {
        Stopwatch sw;
        double worst = 0.0;
        int used = 0;
        int outside = 0;
        bool every_n = true;
        for (int n = 1; n <= 4; ++n) {
            int used_n = 0;
            for (double e2 : linspace(4.0, 12.0, 17)) {
                const double S = analyze_landscape(ModelParams::kpo(0.0, e2)).omega_shallow;
                auto f = [&](double e1) { return analyze_landscape(ModelParams::kpo(e1, e2)).asymmetry_A - n * S; };
                const double hi = bistability_boundary(ModelParams::kpo(0.0, e2)) * (1.0 - 1e-4);
                const double fhi = f(hi);
                if (fhi < 0.0) {
                    // the n-th crossing lies beyond the bistable region
                    ++outside;
                    continue;
                }
                boost::math::tools::eps_tolerance<double> tol(40);
                std::uintmax_t iters = 100;
                auto r = boost::math::tools::toms748_solve(f, 0.0, hi, f(0.0), fhi, tol, iters);
                const double e1 = 0.5 * (r.first + r.second);
                worst = std::max(worst, std::abs(resonance_parabola(n, e1) - e2) / e2);
                ++used;
                ++used_n;
            }
            every_n = every_n && used_n > 0;
        }
        const bool ok = worst <= 0.05 && every_n;
        report(6, "resonance condition vs landscape", ok,
               "worst relative eps2 deviation " + fmt("%.4f", worst) + " over " + std::to_string(used) + " points (" +
                   std::to_string(outside) + " beyond bistability)",
               sw.seconds());
    }

    // 7. chemical transfer at k2 = 12.6
    {
        Stopwatch sw;
        Cut chem([](double k1) { return ModelParams::chemical(k1, 12.6); }, 60);
        const std::vector<double> grid = linspace(0.0, 8.0, 81);
        std::vector<Dip> dips = find_dips(chem, grid);
        std::vector<double> widths;
        std::vector<double> where;
        for (Dip& d : dips) {
            measure_width(chem, d);
            widths.push_back(d.width);
            where.push_back(d.x);
        }
        double tmax = 0.0;
        for (double k1 : grid) tmax = std::max(tmax, chem.T(k1));
        const double t0 = chem.T(0.0);
        const double secs = sw.seconds();
        const bool ok = dips.size() >= 3 && alternating(widths) && tmax > t0 && secs <= 600.0;
        report(7, "chemical transfer", ok,
               "dips at " + list(where) + ", widths " + list(widths, "%.4f") + "; max T " + fmt("%.1f", tmax) +
                   " vs T(0) " + fmt("%.1f", t0),
               secs);
    }

    // 8. null controls
    {
        Stopwatch sw;
        Cut c90 = kpo_cut(7.7, pi / 2.0);
        const std::vector<double> grid = linspace(0.0, 12.0, 61);
        std::vector<double> t(grid.size());
        for (std::size_t k = 0; k < grid.size(); ++k) t[k] = c90.T(grid[k]);
        double deepest = 0.0;
        for (std::size_t k = 1; k + 1 < t.size(); ++k) {
            if (!(t[k] < t[k - 1] && t[k] <= t[k + 1])) continue;
            double sum = 0.0;
            int cnt = 0;
            for (std::size_t j = 0; j < t.size(); ++j)
                if (std::abs(grid[j] - grid[k]) <= 1.0) {
                    sum += t[j];
                    ++cnt;
                }
            const double mean = sum / cnt;
            deepest = std::max(deepest, (mean - t[k]) / mean);
        }
        double mirror = 0.0;
        for (double e1 : {1.0, std::sqrt(7.7), 5.0, 9.0}) {
            SolverSettings s;
            const DecayFit a = dynamics_point(ModelParams::kpo(e1, 7.7, 0.0), s, bath);
            const DecayFit b = dynamics_point(ModelParams::kpo(e1, 7.7, pi), s, bath);
            mirror = std::max({mirror, std::abs(a.T - b.T) / a.T, std::abs(a.O - b.O)});
        }
        const bool ok = deepest <= 0.05 && mirror <= 1e-6;
        report(8, "null controls", ok,
               "deepest dip at phi=90 " + fmt("%.4f", deepest) + " of local mean; phi=180 mismatch " + fmt("%.2g", mirror),
               sw.seconds());
    }

    // 9. trajectory invariants, fit against spectral, symmetric steady state
    {
        Stopwatch sw;
        const int dim = 40;
        double trace_err = 0.0;
        double herm_err = 0.0;
        double min_eig = 0.0;
        double mismatch = 0.0;
        for (double e1 : {0.0, 1.0, 4.0}) {
            HermitianOperator H = build_kpo_hamiltonian(ModelParams::kpo(e1, 7.7), dim);
            Superoperator L = liouvillian(H, bath);
            const DecayFit spectral = activation_time_spectral(L);
            const WellSides sides = well_sides(H);
            Trajectory tr = evolve(shallow_initial_state(H), L, log_time_grid(10.0 * spectral.T), sides);
            for (std::size_t k = 0; k < tr.times.size(); ++k) {
                trace_err = std::max(trace_err, tr.trace_error[k]);
                herm_err = std::max(herm_err, tr.hermiticity_error[k]);
                min_eig = std::min(min_eig, tr.min_eigenvalue[k]);
            }
            mismatch = std::max(mismatch, std::abs(activation_time_fit(tr).T - spectral.T) / spectral.T);
        }
        Superoperator L = liouvillian(build_hamiltonian(ModelParams::kpo(0.0, 7.7)), bath);
        const DensityMatrix ss = steady_state(L);
        const WellSides sides = well_sides(L.H);
        const double ratio = (sides.shallow * ss.m).trace().real() / (sides.deep * ss.m).trace().real();
        const bool ok = trace_err <= 1e-7 && herm_err <= 1e-8 && min_eig >= -1e-8 && mismatch <= 0.05 &&
                        std::abs(ratio - 1.0) <= 1e-6;
        report(9, "numerical invariants", ok,
               "trace " + fmt("%.1e", trace_err) + ", hermiticity " + fmt("%.1e", herm_err) + ", min eig " +
                   fmt("%.1e", min_eig) + ", fit/spectral " + fmt("%.4f", mismatch) + ", ratio-1 " +
                   fmt("%.1e", ratio - 1.0),
               sw.seconds());
    }

    // 10. ILAS maxima along eps2 = 10
    {
        Stopwatch sw;
        const std::vector<double> e1 = linspace(0.0, 12.0, 241);
        const int n_cff = default_n_cff(10.0);
        std::vector<double> j(e1.size());
        for (std::size_t k = 0; k < e1.size(); ++k)
            j[k] = ilas(eigensystem(build_hamiltonian(ModelParams::kpo(e1[k], 10.0)), n_cff + 1), n_cff);
        std::vector<double> maxima;
        for (std::size_t k = 1; k + 1 < j.size(); ++k)
            if (j[k] > j[k - 1] && j[k] >= j[k + 1]) maxima.push_back(e1[k]);
        bool ok = true;
        std::vector<double> matched;
        for (int n = 1; n * std::sqrt(10.0) <= 12.0; ++n) {
            const double target = n * std::sqrt(10.0);
            double best = std::numeric_limits<double>::infinity();
            for (double m : maxima)
                if (std::abs(m - target) < std::abs(best - target)) best = m;
            matched.push_back(best);
            ok = ok && std::abs(best - target) <= 0.2;
        }
        report(10, "ILAS maxima on resonances", ok, "nearest maxima " + list(matched) + " vs n sqrt(10)", sw.seconds());
    }

    // 11. detailed balance at the first and fourth resonance of the eps2 = 7.7 cut
    {
        Stopwatch sw;
        bool ok = dips77.size() >= 4;
        std::string detail = "fewer than four resonances located";
        if (ok) {
            auto analyze = [](double e1) {
                HermitianOperator H = build_hamiltonian(ModelParams::kpo(e1, 7.7));
                return detailed_balance_analysis(steady_state(liouvillian(H, bath)), eigensystem(H));
            };
            const DetailedBalanceReport first = analyze(dips77[0].x);
            const DetailedBalanceReport fourth = analyze(dips77[3].x);
            ok = fourth.beta_std * 5.0 <= first.beta_std && fourth.trace_distance < 1e-2;
            detail = "beta_std " + fmt("%.3g", first.beta_std) + " -> " + fmt("%.3g", fourth.beta_std) +
                     ", trace distance at n=4 " + fmt("%.2g", fourth.trace_distance);
        }
        report(11, "detailed balance", ok, detail, sw.seconds());
    }

    // 12. conversion of the fitted circuit parameters
    {
        Stopwatch sw;
        const double mhz = 2.0 * pi * 1e6;
        PhysicalDriveParams p;
        p.g3 = -16.8 * mhz;
        p.g4 = -0.296 * mhz;
        p.omega_a = 6086.0 * mhz;
        p.Omega1 = 1.7 * mhz;
        p.Omega2 = 30.0 * mhz;
        const ConvertedParams c = convert_physical_params(p);
        const double k = c.K / mhz;
        const bool ok = k >= 0.5 && k <= 0.7 && c.eps1 == p.Omega1 / 2.0;
        report(12, "conversion formulas", ok, "K/2pi = " + fmt("%.4f", k) + " MHz", sw.seconds());
    }

    std::printf("total %.1f s, %d failed\n", total.seconds(), failures);
    return failures == 0 ? 0 : 1;
}
