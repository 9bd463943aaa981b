#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kerrwell/hilbert.hpp"

namespace kerrwell {

struct Spectrum {
    Eigen::VectorXd energies;  // ascending, quasi-energy convention
    CMat vectors;              // columns aligned with energies
    std::optional<ModelParams> params;
    int dim = 0;
    EnergySign sign = EnergySign::natural;
    double residual = 0.0;
    std::vector<std::string> warnings;

    int size() const { return static_cast<int>(energies.size()); }
};

// n_keep <= 0 keeps every level
Spectrum eigensystem(const HermitianOperator& H, int n_keep = 0);

Eigen::VectorXd transition_spectrum(const Spectrum& spec);

enum class Axis { eps1, eps2, phi, k1, k2 };

Axis parse_axis(const std::string& s);
std::string axis_name(Axis a);
ModelParams with_axis(ModelParams p, Axis a, double value);
double axis_value(const ModelParams& p, Axis a);
bool axis_valid_for(Axis a, ModelFamily f);

struct GapTrace {
    Axis axis = Axis::eps1;
    std::vector<double> values;
    std::vector<std::pair<int, int>> pairs;
    std::vector<std::vector<double>> gaps;  // [pair][point]
    std::vector<std::vector<std::pair<int, int>>> tracked;  // level indices used, [pair][point]
    std::vector<std::vector<std::string>> warnings;         // per point
    int dim = 0;

    bool tracking_lost(std::size_t point) const { return !warnings[point].empty(); }
};

struct GapTraceOptions {
    int dim = 0;       // 0: truncation rule at the largest axis magnitude
    int n_keep = 0;    // 0: enough levels to cover the pairs with margin
    double basis_freq = 0.0;
};

GapTrace gap_trace(const ModelParams& base, Axis axis, const std::vector<double>& values,
                   const std::vector<std::pair<int, int>>& pairs, const GapTraceOptions& opt = {});

// sum over the n_cff gaps among levels 0..n_cff of |1 / log(gap)|
double ilas(const Spectrum& spec, int n_cff);
int default_n_cff(double eps2);

} // namespace kerrwell
