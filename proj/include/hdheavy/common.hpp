#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hdh {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// One K x K (or N x N) matrix per month.
using MatrixSeq = std::vector<MatrixXd>;

/// Minimum eigenvalue a correlation or covariance matrix must exceed to count as PD.
inline constexpr double kPdTolerance = 1e-10;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

enum class ErrorCode {
    Schema,
    Parse,
    Gap,
    DegenerateMonth,
    ParameterExplosion,
    PdViolation,
    Domain,
    DataQuality,
    Dimension,
    Estimation,
    Input,
    Config,
    Solver,
    Io,
};

std::string_view to_string(ErrorCode code);

/// Library error. The code is stable and is what the CLI reports in its error record.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

// Linear algebra helpers shared across modules.

/// True when every eigenvalue of the symmetric matrix exceeds `margin`.
/// Implemented as a Cholesky attempt on (m - margin * I).
[[nodiscard]] bool is_pd(const MatrixXd& m, double margin = kPdTolerance);

[[nodiscard]] double min_eigenvalue(const MatrixXd& m);

[[nodiscard]] double max_asymmetry(const MatrixXd& m);

/// Scales a covariance-like matrix to unit diagonal: D^{-1/2} m D^{-1/2}.
[[nodiscard]] MatrixXd to_correlation(const MatrixXd& m);

/// Half-vectorisation: lower triangle stacked column by column.
[[nodiscard]] VectorXd vech(const MatrixXd& m);

/// Cholesky factor written into the lower triangle of `a`; false when `a` is not PD.
/// Allocation-free, for the small matrices inside likelihood loops.
bool cholesky_in_place(MatrixXd& a);

/// log|A| from its Cholesky factor.
[[nodiscard]] double cholesky_logdet(const MatrixXd& chol);

/// Solves A x = b in place given the Cholesky factor of A.
void cholesky_solve_in_place(const MatrixXd& chol, VectorXd& b);

/// x' A^{-1} x given the Cholesky factor of A; `work` is scratch of the same length as x.
[[nodiscard]] double cholesky_quadratic(const MatrixXd& chol, const VectorXd& x, VectorXd& work);

[[nodiscard]] double mean(const VectorXd& v);

/// Sample standard deviation with n - 1 divisor; 0 for fewer than two points.
[[nodiscard]] double stddev(const VectorXd& v);

}  // namespace hdh
