#pragma once

#include "hdheavy/common.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace hdh::optim {

/// Open interval (lower, upper). An infinite upper bound switches to a log map.
struct Bound {
    double lower = 0.0;
    double upper = 1.0;
};

/// Maps box-constrained parameters to an unconstrained space (logistic or log per
/// coordinate) and back.
class BoxTransform {
public:
    explicit BoxTransform(std::vector<Bound> bounds);

    [[nodiscard]] VectorXd to_internal(const VectorXd& x) const;
    [[nodiscard]] VectorXd to_external(const VectorXd& z) const;
    [[nodiscard]] std::size_t size() const { return bounds_.size(); }

private:
    std::vector<Bound> bounds_;
};

struct Options {
    int starts = 5;                  // total starts, including the supplied ones
    int max_evaluations = 20000;     // per start, simplex phase
    double value_tolerance = 1e-10;  // relative spread of simplex values
    double simplex_tolerance = 1e-8;
    int bfgs_iterations = 200;
    double gradient_tolerance = 1e-6;
    double fd_step = 1e-6;
    double jitter = 0.75;  // std-dev of random restarts in internal coordinates
    std::uint64_t seed = 20240601;
};

struct Result {
    VectorXd x;
    double value = kNegInf;
    double start_value = kNegInf;
    bool converged = false;
    std::size_t evaluations = 0;
    int best_start = -1;
};

/// Objective to maximise; return -inf (or NaN) at infeasible points.
using Objective = std::function<double(const VectorXd&)>;

/// Multi-start maximisation: Nelder-Mead in the transformed space followed by a BFGS
/// polish with central finite-difference gradients. The returned point is never worse
/// than the first start.
Result maximize(const Objective& objective, const VectorXd& start, const std::vector<Bound>& bounds,
                const Options& options, const std::vector<VectorXd>& extra_starts = {});

}  // namespace hdh::optim
