#include "hdheavy/mcs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

namespace hdh {

std::vector<std::size_t> circular_block_indices(std::size_t n, std::size_t block_length, std::uint64_t seed,
                                                std::uint64_t replication) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(replication), static_cast<std::uint32_t>(replication >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> start(0, n - 1);
    std::vector<std::size_t> idx;
    idx.reserve(n);
    while (idx.size() < n) {
        const std::size_t s = start(rng);
        for (std::size_t k = 0; k < block_length && idx.size() < n; ++k) {
            idx.push_back((s + k) % n);
        }
    }
    return idx;
}

McsResult model_confidence_set(const MatrixXd& losses, const std::vector<std::string>& labels,
                               const McsOptions& options) {
    const auto n = losses.rows();
    const auto M = losses.cols();
    if (static_cast<std::size_t>(M) != labels.size()) {
        fail(ErrorCode::Dimension, "mcs: one label per model column required");
    }
    if (M < 1 || n < 12) {
        fail(ErrorCode::Input, "mcs: need at least one model and 12 periods");
    }
    if (options.block_length == 0 || options.replications == 0 || !(options.confidence > 0.0) ||
        !(options.confidence < 1.0)) {
        fail(ErrorCode::Config, "mcs: invalid bootstrap settings");
    }
    if (!losses.allFinite()) {
        fail(ErrorCode::Input, "mcs: losses must be finite");
    }
    McsResult result;
    result.labels = labels;
    result.options = options;
    result.average_loss = losses.colwise().mean().transpose();
    result.p_values = VectorXd::Ones(M);
    result.included.assign(static_cast<std::size_t>(M), true);

    // Bootstrap means of each model's loss; all elimination steps share these draws.
    const auto B = static_cast<Eigen::Index>(options.replications);
    MatrixXd boot(B, M);
    const auto fill = [&](Eigen::Index first, Eigen::Index last) {
        for (Eigen::Index b = first; b < last; ++b) {
            const auto idx = circular_block_indices(static_cast<std::size_t>(n), options.block_length, options.seed,
                                                    static_cast<std::uint64_t>(b));
            for (Eigen::Index m = 0; m < M; ++m) {
                double s = 0.0;
                for (const auto t : idx) {
                    s += losses(static_cast<Eigen::Index>(t), m);
                }
                boot(b, m) = s / static_cast<double>(n);
            }
        }
    };
    const unsigned workers = std::max(1U, options.workers);
    if (workers == 1) {
        fill(0, B);
    } else {
        std::vector<std::thread> pool;
        const Eigen::Index chunk = (B + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const Eigen::Index first = std::min<Eigen::Index>(B, w * chunk);
            const Eigen::Index last = std::min<Eigen::Index>(B, first + chunk);
            pool.emplace_back(fill, first, last);
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    const double loss_scale = losses.cwiseAbs().mean();
    std::vector<Eigen::Index> alive(static_cast<std::size_t>(M));
    for (Eigen::Index m = 0; m < M; ++m) {
        alive[static_cast<std::size_t>(m)] = m;
    }
    double running = 0.0;
    std::vector<double> statistic(static_cast<std::size_t>(B));
    while (alive.size() > 1) {
        const std::size_t A = alive.size();
        MatrixXd t_stat = MatrixXd::Zero(static_cast<Eigen::Index>(A), static_cast<Eigen::Index>(A));
        std::fill(statistic.begin(), statistic.end(), 0.0);
        double observed = 0.0;
        for (std::size_t a = 0; a < A; ++a) {
            for (std::size_t c = a + 1; c < A; ++c) {
                const Eigen::Index i = alive[a];
                const Eigen::Index j = alive[c];
                const double d = result.average_loss(i) - result.average_loss(j);
                double var = 0.0;
                for (Eigen::Index b = 0; b < B; ++b) {
                    const double e = boot(b, i) - boot(b, j) - d;
                    var += e * e;
                }
                var /= static_cast<double>(B);
                const double tiny = 1e-14 * std::max(std::abs(d), loss_scale);
                double t = 0.0;
                if (var > tiny * tiny) {
                    const double sd = std::sqrt(var);
                    t = d / sd;
                    for (Eigen::Index b = 0; b < B; ++b) {
                        const double tb = std::abs(boot(b, i) - boot(b, j) - d) / sd;
                        statistic[static_cast<std::size_t>(b)] = std::max(statistic[static_cast<std::size_t>(b)], tb);
                    }
                } else if (std::abs(d) > tiny) {
                    t = std::copysign(std::numeric_limits<double>::infinity(), d);
                }
                t_stat(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c)) = t;
                t_stat(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(a)) = -t;
                observed = std::max(observed, std::abs(t));
            }
        }
        std::size_t exceed = 0;
        for (const double s : statistic) {
            exceed += s >= observed ? 1 : 0;
        }
        const double p = static_cast<double>(exceed) / static_cast<double>(B);
        running = std::max(running, p);

        std::size_t worst = 0;
        double worst_value = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < A; ++a) {
            const double v = t_stat.row(static_cast<Eigen::Index>(a)).maxCoeff();
            if (v > worst_value) {
                worst_value = v;
                worst = a;
            }
        }
        const Eigen::Index eliminated = alive[worst];
        result.p_values(eliminated) = running;
        result.elimination_order.push_back(static_cast<std::size_t>(eliminated));
        alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(worst));
    }
    result.p_values(alive.front()) = 1.0;
    result.elimination_order.push_back(static_cast<std::size_t>(alive.front()));
    const double alpha = 1.0 - options.confidence;
    for (Eigen::Index m = 0; m < M; ++m) {
        result.included[static_cast<std::size_t>(m)] = result.p_values(m) >= alpha;
    }
    return result;
}

}  // namespace hdh
