#pragma once

#include "hdheavy/asset_model.hpp"
#include "hdheavy/calendar.hpp"
#include "hdheavy/core_model.hpp"
#include "hdheavy/panel.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hdh {

/// Fully specified data-generating process. Starting values for every recursion are
/// taken from the parameter structs (h_init, m_init, rho_init, p_init).
struct DgpSpec {
    std::size_t K = 1;
    std::size_t N = 1;
    std::size_t T = 120;
    std::size_t days_per_month = 21;
    CoreModelParams core;
    std::vector<AssetModelParams> assets;
    MatrixXd idiosyncratic_correlation;  // N x N; empty means identity
    std::uint64_t seed = 1;
    YearMonth start{2000, 1};
    int max_retries = 20;
    std::vector<std::string> factor_names;
    std::vector<std::string> asset_names;

    /// Throws Input or Dimension on an inconsistent spec.
    void validate() const;
};

/// A stationary spec with moderate persistence and correlations near 0.3.
[[nodiscard]] DgpSpec default_dgp(std::size_t K, std::size_t N, std::size_t T, std::uint64_t seed);

struct SimulationResult {
    ReturnPanel panel;
    CoreFilteredState core;
    std::vector<AssetFilteredState> assets;
    int attempts = 1;
};

/// Monthly factor returns are N(0, H_t); asset returns follow the factor model with
/// conditional mean rho' R^{-1} u and variance h (1 - rho' R^{-1} rho). Each month holds
/// d i.i.d. N(0, M_t / d) daily vectors, so the realized covariance is Wishart with mean
/// M_t, the joint matrix built from (m, P, p). Paths that leave the feasible region are
/// redrawn from a fresh substream up to max_retries times.
[[nodiscard]] SimulationResult simulate(const DgpSpec& spec);

}  // namespace hdh
