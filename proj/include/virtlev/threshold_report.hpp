#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "virtlev/core.hpp"
#include "virtlev/weighted_space.hpp"

namespace virtlev {

enum class Classification { Regular, Virtual, Inconclusive };

constexpr std::string_view to_string(Classification c) noexcept {
    switch (c) {
    case Classification::Regular: return "Regular";
    case Classification::Virtual: return "Virtual";
    case Classification::Inconclusive: return "Inconclusive";
    }
    return "unknown";
}

struct SweepPoint {
    double radius = 0.0;
    double norm = 0.0;
    cplx z;
};

/// Outcome of a threshold classification, from either the Wronskian test or
/// a resolvent norm sweep.
struct ThresholdReport {
    Classification classification = Classification::Inconclusive;
    std::optional<std::size_t> rank;     // known only for Virtual
    std::vector<double> state_points;    // sample points of the states
    std::vector<CVector> states;         // virtual states, sup-norm 1
    double alpha = std::numeric_limits<double>::quiet_NaN();
    double r_squared = std::numeric_limits<double>::quiet_NaN();
    bool log_divergence = false;
    std::vector<SweepPoint> norms;
    std::vector<std::pair<std::string, double>> diagnostics;
    std::vector<std::string> notes;
    std::optional<KernelOperator> green;  // Wronskian test, Regular case

    void add(std::string key, double value) { diagnostics.emplace_back(std::move(key), value); }

    std::optional<double> diagnostic(const std::string& key) const {
        for (const auto& [k, v] : diagnostics)
            if (k == key) return v;
        return std::nullopt;
    }
};

/// Scales v to sup-norm 1 with a real positive entry of largest modulus.
inline CVector normalize_sup(const CVector& v) {
    Eigen::Index arg = 0;
    const double m = v.cwiseAbs().maxCoeff(&arg);
    if (!(m > 0.0)) return v;
    const cplx phase = v[arg] / std::abs(v[arg]);
    return v / (m * phase);
}

} // namespace virtlev
