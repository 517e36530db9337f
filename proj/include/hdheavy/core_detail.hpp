#pragma once

// Allocation-light kernels shared by the filters and the estimators.

#include "hdheavy/core_model.hpp"

namespace hdh::detail {

/// Variance-type path with the driver entering through the leg chosen by sign(t-1).
/// False when a value is non-finite or non-positive; `out` then holds the prefix.
bool variance_path(const VarianceEquation& eq, double init, const VectorXd& driver, const VectorXd& sign,
                   VectorXd& out);

bool realized_mean_path(const VarianceEquation& eq, double init, const VectorXd& pos, const VectorXd& neg,
                        VectorXd& out);

double gaussian_variance_llf(const VectorXd& h, const VectorXd& r);

double correlation_llf(double alpha, double beta, const MatrixXd& R_bar, const MatrixXd& P_bar, const MatrixSeq& rl,
                       const MatrixXd& u_hat);

/// `scaled_rc[t]` = L_t^{-1} RC_t L_t^{-1} for the fixed first-stage L_t.
double realized_correlation_llf(double alpha, double beta, const MatrixXd& P_bar, const MatrixSeq& rl,
                                const MatrixSeq& scaled_rc);

MatrixSeq scale_realized_covariances(const MatrixSeq& rc, const MatrixXd& m);

}  // namespace hdh::detail
