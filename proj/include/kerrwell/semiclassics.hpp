#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kerrwell/hilbert.hpp"

namespace kerrwell {

enum class Well { shallow, deep };
std::string well_name(Well w);

struct PhasePoint {
    double x = 0.0;
    double p = 0.0;
    double q = 0.0;
};

struct ClassicalLandscape {
    ModelParams params;
    std::vector<PhasePoint> well_minima;  // shallow first
    PhasePoint shallow;
    PhasePoint deep;
    PhasePoint saddle;
    double asymmetry_A = 0.0;       // shallow minus deep
    double barrier_shallow = 0.0;   // saddle minus shallow minimum
    double barrier_deep = 0.0;
    // small-oscillation frequencies sqrt(det Hessian) at the minima
    double omega_shallow = 0.0;
    double omega_deep = 0.0;
};

// quasi-energy for the KPO; p^2/2 + V(x) for the chemical family
double classical_hamiltonian(const ModelParams& p, double x, double mom);
Eigen::Vector2d classical_gradient(const ModelParams& p, double x, double mom);
Eigen::Matrix2d classical_hessian(const ModelParams& p, double x, double mom);

// coefficients c0..c4 of t -> q(x0 + t dx, p0 + t dp)
std::array<double, 5> classical_on_line(const ModelParams& p, double x0, double p0, double dx, double dp);

struct CriticalPoint {
    PhasePoint point;
    int negative_curvatures = 0;  // 0 minimum, 1 saddle, 2 maximum
};

std::vector<CriticalPoint> critical_points(const ModelParams& p);

// two minima joined by a saddle; cheaper than analyze_landscape on failure
bool is_bistable(const ModelParams& p);

// throws BistabilityLost with the located boundary when only one minimum exists
ClassicalLandscape analyze_landscape(const ModelParams& p);

// drive amplitude (eps1 or k1 magnitude) beyond which one minimum disappears
double bistability_boundary(const ModelParams& p);

struct LobeArea {
    double action = 0.0;           // area / 2 pi
    double area_sweep = 0.0;       // iterated quadrature over chords
    double area_contour = 0.0;     // polar contour integral around the minimum
};

double lobe_action(const ModelParams& p, Well w);
LobeArea lobe_area(const ModelParams& p, Well w);
// area of both lobes / 2 pi
double separatrix_action(const ModelParams& p);

// number of quantized orbits n with n + 1/2 <= action
int ebk_orbit_count(double action);

struct EBKPoint {
    double eps1 = 0.0;
    double eps2 = 0.0;
};

struct EBKCurve {
    int n = 0;
    Well well = Well::shallow;
    double phi = 0.0;
    std::vector<EBKPoint> points;
    std::vector<double> omitted_eps2;
};

EBKCurve ebk_curve(int n_quantum, Well well, const std::vector<double>& eps2_values, double phi = 0.0);

// solve lobe_action = n + 1/2 for eps2 at fixed eps1; NaN when no root in [lo, hi]
double ebk_eps2(int n_quantum, Well well, double eps1, double lo, double hi, double phi = 0.0);

double resonance_parabola(int n, double eps1);

struct TripleIntersection {
    int n = 0;
    int m = 0;
    double eps1 = 0.0;
    double eps2 = 0.0;
    double deep_offset = 0.0;  // eps2 distance to the deep-well curve
};

std::vector<TripleIntersection> triple_intersections(int n_max, int m_max, double eps2_lo, double eps2_hi);

struct RabiFrequency {
    double value = 0.0;
    bool heuristic = false;
};

RabiFrequency rabi_frequency(double eps1, double eps2);

} // namespace kerrwell
