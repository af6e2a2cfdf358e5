#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gaugeqm {

enum class ErrorKind {
    degenerate_metric,
    invalid_metric,
    outside_chart,
    invalid_path,
    convergence_failure,
    non_continuing,
    unsupported_signature,
    insufficient_domain,
    missing_boundary,
    resolution,
    degenerate_statistics,
    invalid_region,
    non_closing,
    invalid_argument,
    config,
};

constexpr std::string_view to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::degenerate_metric: return "degenerate-metric";
    case ErrorKind::invalid_metric: return "invalid-metric";
    case ErrorKind::outside_chart: return "outside-chart";
    case ErrorKind::invalid_path: return "invalid-path";
    case ErrorKind::convergence_failure: return "convergence-failure";
    case ErrorKind::non_continuing: return "non-continuing";
    case ErrorKind::unsupported_signature: return "unsupported-signature";
    case ErrorKind::insufficient_domain: return "insufficient-domain";
    case ErrorKind::missing_boundary: return "missing-boundary";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::degenerate_statistics: return "degenerate-statistics";
    case ErrorKind::invalid_region: return "invalid-region";
    case ErrorKind::non_closing: return "non-closing";
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::config: return "config";
    }
    return "unknown";
}

/// Every library failure is reported through this type; `kind()` is stable,
/// the message is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Raised by iterative solvers; carries the last residual reached.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual)
        : Error(ErrorKind::convergence_failure,
                what + " (final residual " + std::to_string(residual) + ")"),
          residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

inline void require(bool cond, ErrorKind kind, const std::string& what) {
    if (!cond) throw Error(kind, what);
}

} // namespace gaugeqm
