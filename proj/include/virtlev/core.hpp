#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace virtlev {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

inline constexpr double pi = std::numbers::pi;
inline constexpr double euler_gamma = std::numbers::egamma;
inline constexpr cplx I{0.0, 1.0};

enum class ErrorKind {
    Dimension,
    InvalidOperator,
    InvalidInput,
    BranchAmbiguity,
    ThresholdSingularity,
    OnDiagonalSingularity,
    Unsupported,
    DiscretizationFailure,
    VirtualLevel,
    NearSpectrum,
    Fit,
    NoBoundState,
    ClassificationConflict,
    Model,
    OutsideResolventSet,
    DegenerateFunctional,
    SamplingFailure,
    SolverFailure,
    Usage,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::InvalidOperator: return "invalid_operator";
    case ErrorKind::InvalidInput: return "invalid_input";
    case ErrorKind::BranchAmbiguity: return "branch_ambiguity";
    case ErrorKind::ThresholdSingularity: return "threshold_singularity";
    case ErrorKind::OnDiagonalSingularity: return "on_diagonal_singularity";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::DiscretizationFailure: return "discretization_failure";
    case ErrorKind::VirtualLevel: return "virtual_level";
    case ErrorKind::NearSpectrum: return "near_spectrum";
    case ErrorKind::Fit: return "fit";
    case ErrorKind::NoBoundState: return "no_bound_state";
    case ErrorKind::ClassificationConflict: return "classification_conflict";
    case ErrorKind::Model: return "model";
    case ErrorKind::OutsideResolventSet: return "outside_resolvent_set";
    case ErrorKind::DegenerateFunctional: return "degenerate_functional";
    case ErrorKind::SamplingFailure: return "sampling_failure";
    case ErrorKind::SolverFailure: return "solver_failure";
    case ErrorKind::Usage: return "usage";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

inline bool is_finite(cplx v) noexcept {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
}

// z in [0, inf) on the real axis
inline bool on_positive_axis(cplx z) noexcept {
    return z.imag() == 0.0 && z.real() >= 0.0;
}

} // namespace virtlev
