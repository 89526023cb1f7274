#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ulr {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

/// Bad arguments or configuration. The CLI maps this to exit status 2.
class InvalidInput : public std::invalid_argument {
public:
    explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Config validation failure carrying the offending field path.
class ValidationError : public InvalidInput {
public:
    ValidationError(std::string path, const std::string& what)
        : InvalidInput(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

/// Numerical failure (divergence, non-convergence, truncation). Exit status 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// The truncated basis is too small for the requested state.
class TruncationError : public NumericalError {
public:
    explicit TruncationError(const std::string& what) : NumericalError(what) {}
};

} // namespace ulr
