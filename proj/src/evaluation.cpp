#include "hdheavy/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace hdh {

CovarianceProxy parse_proxy(std::string_view text) {
    if (text == "outer") {
        return CovarianceProxy::OuterProduct;
    }
    if (text == "realized") {
        return CovarianceProxy::RealizedCovariance;
    }
    fail(ErrorCode::Config, "unknown covariance proxy '" + std::string(text) + "' (expected outer or realized)");
}

std::string_view to_string(CovarianceProxy proxy) {
    return proxy == CovarianceProxy::OuterProduct ? "outer" : "realized";
}

namespace {

void check_pair(const MatrixXd& C, const MatrixXd& H) {
    if (C.rows() != C.cols() || H.rows() != H.cols() || C.rows() != H.rows()) {
        fail(ErrorCode::Dimension, "loss: matrices must be square and of equal size");
    }
    if (max_asymmetry(C) > 1e-10 || max_asymmetry(H) > 1e-10) {
        fail(ErrorCode::Input, "loss: input matrix is not symmetric");
    }
}

void check_pd(const MatrixXd& H, const char* who) {
    if (H.rows() != H.cols() || H.rows() == 0) {
        fail(ErrorCode::Dimension, std::string(who) + ": matrix must be square");
    }
    if (!is_pd(H)) {
        fail(ErrorCode::PdViolation, std::string(who) + ": covariance matrix is not positive definite");
    }
}

VectorXd support_solution(const MatrixXd& H, const std::vector<Eigen::Index>& support) {
    const auto m = static_cast<Eigen::Index>(support.size());
    MatrixXd sub(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) {
            sub(a, b) = H(support[static_cast<std::size_t>(a)], support[static_cast<std::size_t>(b)]);
        }
    }
    const VectorXd x = sub.llt().solve(VectorXd::Ones(m));
    VectorXd w = VectorXd::Zero(H.rows());
    const double total = x.sum();
    for (Eigen::Index a = 0; a < m; ++a) {
        w(support[static_cast<std::size_t>(a)]) = x(a) / total;
    }
    return w;
}

VectorXd project_simplex(const VectorXd& v) {
    std::vector<double> u(v.data(), v.data() + v.size());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cumulative += u[j];
        const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) {
            theta = t;
        }
    }
    return (v.array() - theta).max(0.0);
}

}  // namespace

double loss_ed(const MatrixXd& C, const MatrixXd& H) {
    check_pair(C, H);
    double s = 0.0;
    for (Eigen::Index j = 0; j < C.cols(); ++j) {
        for (Eigen::Index i = j; i < C.rows(); ++i) {
            const double d = C(i, j) - H(i, j);
            s += d * d;
        }
    }
    return s;
}

double loss_fn(const MatrixXd& C, const MatrixXd& H) {
    check_pair(C, H);
    return (C - H).squaredNorm();
}

VectorXd gmvp_weights(const MatrixXd& H) {
    check_pd(H, "gmvp_weights");
    const VectorXd x = H.llt().solve(VectorXd::Ones(H.rows()));
    return x / x.sum();
}

VectorXd long_only_enumeration(const MatrixXd& H) {
    check_pd(H, "long_only_enumeration");
    const auto N = H.rows();
    if (N > 20) {
        fail(ErrorCode::Input, "long_only_enumeration: too many assets for exhaustive search");
    }
    VectorXd best;
    double best_value = std::numeric_limits<double>::infinity();
    std::vector<Eigen::Index> support;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << N); ++mask) {
        support.clear();
        for (Eigen::Index i = 0; i < N; ++i) {
            if ((mask >> i) & 1U) {
                support.push_back(i);
            }
        }
        const VectorXd w = support_solution(H, support);
        if ((w.array() < 0.0).any()) {
            continue;
        }
        const double value = w.dot(H * w);
        if (value < best_value) {
            best_value = value;
            best = w;
        }
    }
    return best;
}

double long_only_kkt_violation(const MatrixXd& H, const VectorXd& w) {
    const VectorXd g = 2.0 * H * w;
    double lambda = 0.0;
    double mass = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        lambda += w(i) * g(i);
        mass += w(i);
    }
    lambda /= mass;
    double violation = std::abs(mass - 1.0) + std::max(0.0, -w.minCoeff());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w(i) > 1e-12) {
            violation = std::max(violation, std::abs(g(i) - lambda));
        } else {
            violation = std::max(violation, lambda - g(i));
        }
    }
    return violation;
}

VectorXd gmvp_weights_long_only(const MatrixXd& H) {
    check_pd(H, "gmvp_weights_long_only");
    const auto N = H.rows();
    const VectorXd unconstrained = gmvp_weights(H);
    if ((unconstrained.array() >= 0.0).all()) {
        return unconstrained;
    }
    if (N <= 12) {
        return long_only_enumeration(H);
    }
    return long_only_active_set(H);
}

VectorXd long_only_active_set(const MatrixXd& H) {
    check_pd(H, "long_only_active_set");
    const auto N = H.rows();
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(H, Eigen::EigenvaluesOnly);
    const double step = 1.0 / (2.0 * eig.eigenvalues().maxCoeff());
    VectorXd w = VectorXd::Constant(N, 1.0 / static_cast<double>(N));
    for (int it = 0; it < 20000; ++it) {
        const VectorXd next = project_simplex(w - step * 2.0 * H * w);
        const double moved = (next - w).lpNorm<Eigen::Infinity>();
        w = next;
        if (moved < 1e-14) {
            break;
        }
    }
    // Active-set polish: exact solve on the support, adding or dropping one index at a time.
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < N; ++i) {
        if (w(i) > 1e-10) {
            support.push_back(i);
        }
    }
    const double scale = H.diagonal().maxCoeff();
    for (Eigen::Index iter = 0; iter < 10 * N; ++iter) {
        const VectorXd candidate = support_solution(H, support);
        Eigen::Index most_negative = -1;
        for (const auto i : support) {
            if (candidate(i) < 0.0 && (most_negative < 0 || candidate(i) < candidate(most_negative))) {
                most_negative = i;
            }
        }
        if (most_negative >= 0 && support.size() > 1) {
            support.erase(std::find(support.begin(), support.end(), most_negative));
            continue;
        }
        const VectorXd g = 2.0 * H * candidate;
        const double lambda = g(support.front());
        Eigen::Index entering = -1;
        double worst = -1e-12 * scale;
        for (Eigen::Index i = 0; i < N; ++i) {
            if (std::find(support.begin(), support.end(), i) == support.end() && g(i) - lambda < worst) {
                worst = g(i) - lambda;
                entering = i;
            }
        }
        if (entering < 0) {
            return candidate;
        }
        support.push_back(entering);
        std::sort(support.begin(), support.end());
    }
    fail(ErrorCode::Solver, "long_only_active_set: active-set polish did not terminate (KKT violation " +
                                std::to_string(long_only_kkt_violation(H, w)) + ")");
}

PortfolioTrack portfolio_track(const MatrixXd& weights, const MatrixXd& realized_returns) {
    if (weights.rows() != realized_returns.rows() || weights.cols() != realized_returns.cols()) {
        fail(ErrorCode::Dimension, "portfolio_track: weights and returns are misaligned");
    }
    const auto T = weights.rows();
    const auto N = weights.cols();
    PortfolioTrack p;
    p.weights = weights;
    p.returns.resize(T);
    p.turnover.resize(T);
    p.short_positions.resize(T);
    for (Eigen::Index t = 0; t < T; ++t) {
        p.returns(t) = weights.row(t).dot(realized_returns.row(t));
        double to = 0.0;
        for (Eigen::Index i = 0; i < N; ++i) {
            double prev = 0.0;
            if (t > 0) {
                prev = weights(t - 1, i) * (1.0 + realized_returns(t - 1, i)) / (1.0 + p.returns(t - 1));
            }
            to += std::abs(weights(t, i) - prev);
        }
        p.turnover(t) = to;
        p.short_positions(t) = static_cast<double>((weights.row(t).array() < 0.0).count());
    }
    auto& s = p.summary;
    s.ar = mean(p.returns) * kMonthsPerYear;
    s.sd = stddev(p.returns) * std::sqrt(kMonthsPerYear);
    s.ir = s.sd > 0.0 ? s.ar / s.sd : std::numeric_limits<double>::quiet_NaN();
    s.to = mean(p.turnover);
    s.sp = mean(p.short_positions) / static_cast<double>(N);
    return p;
}

double quadratic_utility(double r, double gamma) {
    const double g = 1.0 + r;
    return g - gamma / (2.0 * (1.0 + gamma)) * g * g;
}

double utility_fee(const VectorXd& r1, const VectorXd& r2, double gamma) {
    if (r1.size() != r2.size() || r1.size() == 0) {
        fail(ErrorCode::Dimension, "utility_fee: return series must have equal, positive length");
    }
    if (!(gamma > 0.0)) {
        fail(ErrorCode::Input, "utility_fee: gamma must be positive");
    }
    double target = 0.0;
    for (Eigen::Index t = 0; t < r1.size(); ++t) {
        target += quadratic_utility(r1(t), gamma);
    }
    const auto gap = [&](double delta) {
        double s = 0.0;
        for (Eigen::Index t = 0; t < r2.size(); ++t) {
            s += quadratic_utility(r2(t) - delta, gamma);
        }
        return s - target;
    };
    if (gap(0.0) == 0.0) {
        return 0.0;
    }
    // The summed utility of r2 - delta is a concave quadratic in delta that peaks at
    // mean(1 + r2) - (1 + gamma) / gamma and decreases to the right of it.
    double lo = 1.0 + r2.mean() - (1.0 + gamma) / gamma;
    double f_lo = gap(lo);
    if (f_lo < 0.0) {
        fail(ErrorCode::Solver, "utility_fee: no fee equates the two utilities");
    }
    double hi = std::max(lo, 0.0) + 0.5;
    while (gap(hi) > 0.0) {
        hi = lo + 2.0 * (hi - lo);
        if (!std::isfinite(hi)) {
            fail(ErrorCode::Solver, "utility_fee: root bracket diverged");
        }
    }
    while (true) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        const double f_mid = gap(mid);
        if (f_mid == 0.0) {
            return mid;
        }
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return std::abs(gap(lo)) <= std::abs(gap(hi)) ? lo : hi;
}

}  // namespace hdh
