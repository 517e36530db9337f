#pragma once

#include "hdheavy/common.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hdh {

struct McsOptions {
    double confidence = 0.90;
    std::size_t block_length = 4;
    std::size_t replications = 10000;
    std::uint64_t seed = 20240601;
    unsigned workers = 1;
};

struct McsResult {
    std::vector<std::string> labels;
    VectorXd average_loss;
    VectorXd p_values;  // MCS p-values
    std::vector<bool> included;
    std::vector<std::size_t> elimination_order;  // model indices, last survivor last
    McsOptions options;
};

/// Model Confidence Set with the range statistic max_ij |t_ij| and a circular block
/// bootstrap. `losses` is T x M. Replication b draws from its own generator seeded by
/// (seed, b), so results do not depend on the worker count.
[[nodiscard]] McsResult model_confidence_set(const MatrixXd& losses, const std::vector<std::string>& labels,
                                             const McsOptions& options);

/// Circular block bootstrap indices for one replication.
[[nodiscard]] std::vector<std::size_t> circular_block_indices(std::size_t n, std::size_t block_length,
                                                              std::uint64_t seed, std::uint64_t replication);

}  // namespace hdh
