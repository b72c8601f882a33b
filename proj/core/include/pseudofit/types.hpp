// types.hpp — Shared scalar/matrix aliases, error taxonomy, and sampled-series containers

#pragma once

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace pseudofit {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr Complex cplx_i{0.0, 1.0};
inline constexpr double inf = std::numeric_limits<double>::infinity();

// Bad shapes, malformed configs, inconsistent grids.
struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// An iterative kernel failed to converge within its cap.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Requested problem exceeds a configured resource cap.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Quadrature could not certify the requested accuracy; carries the achieved estimate.
struct AccuracyError : std::runtime_error {
    AccuracyError(const std::string& msg, double achieved_error)
        : std::runtime_error(msg), achieved(achieved_error) {}
    double achieved;
};

bool all_finite(const Matrix& m);
void require_finite(const Matrix& m, const char* where);

// Uniformly usable complex-valued samples on a strictly ascending time grid.
struct TimeSeries {
    RealVector grid;
    Vector values;

    TimeSeries() = default;
    TimeSeries(RealVector t, Vector v);

    Index size() const { return grid.size(); }
    // Nonnegative spacing if uniform, -1 otherwise (tolerance 1e-9 relative).
    double uniform_step() const;
};

// Real-valued samples on a strictly ascending frequency grid.
struct FreqSeries {
    RealVector grid;
    RealVector values;

    FreqSeries() = default;
    FreqSeries(RealVector w, RealVector v);

    Index size() const { return grid.size(); }
};

RealVector linspace(double a, double b, Index n);

}  // namespace pseudofit
