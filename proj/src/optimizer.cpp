#include "hdheavy/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace hdh::optim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double logistic(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// Minimisation in internal coordinates; non-finite values become +inf.
class InternalProblem {
public:
    InternalProblem(const Objective& objective, const BoxTransform& transform)
        : objective_(objective), transform_(transform) {}

    double operator()(const VectorXd& z) {
        ++evaluations_;
        if (!z.allFinite()) {
            return kInf;
        }
        const double v = objective_(transform_.to_external(z));
        return std::isfinite(v) ? -v : kInf;
    }

    [[nodiscard]] std::size_t evaluations() const { return evaluations_; }

private:
    const Objective& objective_;
    const BoxTransform& transform_;
    std::size_t evaluations_ = 0;
};

struct Point {
    VectorXd z;
    double f = kInf;
    bool converged = false;
};

Point nelder_mead(InternalProblem& f, const VectorXd& z0, double f0, const Options& o) {
    const auto n = z0.size();
    const double dn = static_cast<double>(n);
    const double alpha = 1.0;
    const double gamma = 1.0 + 2.0 / dn;
    const double rho = 0.75 - 1.0 / (2.0 * dn);
    const double sigma = 1.0 - 1.0 / dn;

    std::vector<VectorXd> simplex(static_cast<std::size_t>(n) + 1, z0);
    std::vector<double> values(static_cast<std::size_t>(n) + 1, f0);
    for (Eigen::Index i = 0; i < n; ++i) {
        auto& v = simplex[static_cast<std::size_t>(i) + 1];
        v(i) += 0.5;
        values[static_cast<std::size_t>(i) + 1] = f(v);
        if (!std::isfinite(values[static_cast<std::size_t>(i) + 1])) {
            v(i) = z0(i) - 0.5;
            values[static_cast<std::size_t>(i) + 1] = f(v);
        }
    }

    std::vector<std::size_t> order(simplex.size());
    const std::size_t start_evals = f.evaluations();
    bool converged = false;
    while (f.evaluations() - start_evals < static_cast<std::size_t>(o.max_evaluations)) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[order.size() - 2];

        double diameter = 0.0;
        for (const auto& v : simplex) {
            diameter = std::max(diameter, (v - simplex[best]).lpNorm<Eigen::Infinity>());
        }
        const double spread = values[worst] - values[best];
        if (std::isfinite(spread) && spread <= o.value_tolerance * (1.0 + std::abs(values[best])) &&
            diameter <= o.simplex_tolerance * 1e3) {
            converged = true;
            break;
        }
        if (diameter <= o.simplex_tolerance) {
            converged = std::isfinite(spread);
            break;
        }

        VectorXd centroid = VectorXd::Zero(n);
        for (std::size_t i = 0; i < simplex.size(); ++i) {
            if (i != worst) {
                centroid += simplex[i];
            }
        }
        centroid /= dn;

        const VectorXd xr = centroid + alpha * (centroid - simplex[worst]);
        const double fr = f(xr);
        if (fr < values[best]) {
            const VectorXd xe = centroid + gamma * (xr - centroid);
            const double fe = f(xe);
            if (fe < fr) {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
            continue;
        }
        if (fr < values[second]) {
            simplex[worst] = xr;
            values[worst] = fr;
            continue;
        }
        const bool outside = fr < values[worst];
        const VectorXd xc = outside ? VectorXd(centroid + rho * (xr - centroid))
                                    : VectorXd(centroid + rho * (simplex[worst] - centroid));
        const double fc = f(xc);
        if (fc < (outside ? fr : values[worst])) {
            simplex[worst] = xc;
            values[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i < simplex.size(); ++i) {
            if (i != best) {
                simplex[i] = simplex[best] + sigma * (simplex[i] - simplex[best]);
                values[i] = f(simplex[i]);
            }
        }
    }
    const auto it = std::min_element(values.begin(), values.end());
    return {simplex[static_cast<std::size_t>(it - values.begin())], *it, converged};
}

VectorXd gradient(InternalProblem& f, const VectorXd& z, double fz, double step) {
    VectorXd g(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double h = step * (1.0 + std::abs(z(i)));
        VectorXd zp = z;
        VectorXd zm = z;
        zp(i) += h;
        zm(i) -= h;
        const double fp = f(zp);
        const double fm = f(zm);
        if (std::isfinite(fp) && std::isfinite(fm)) {
            g(i) = (fp - fm) / (2.0 * h);
        } else if (std::isfinite(fp)) {
            g(i) = (fp - fz) / h;
        } else if (std::isfinite(fm)) {
            g(i) = (fz - fm) / h;
        } else {
            g(i) = 0.0;
        }
    }
    return g;
}

Point bfgs(InternalProblem& f, Point p, const Options& o) {
    const auto n = p.z.size();
    MatrixXd inv_h = MatrixXd::Identity(n, n);
    VectorXd g = gradient(f, p.z, p.f, o.fd_step);
    for (int iter = 0; iter < o.bfgs_iterations; ++iter) {
        if (g.lpNorm<Eigen::Infinity>() <= o.gradient_tolerance * (1.0 + std::abs(p.f))) {
            p.converged = true;
            break;
        }
        VectorXd dir = -inv_h * g;
        if (dir.dot(g) >= 0.0) {
            inv_h.setIdentity();
            dir = -g;
        }
        double t = 1.0;
        double f_new = kInf;
        VectorXd z_new;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            z_new = p.z + t * dir;
            f_new = f(z_new);
            if (std::isfinite(f_new) && f_new <= p.f + 1e-4 * t * g.dot(dir)) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            break;
        }
        const VectorXd g_new = gradient(f, z_new, f_new, o.fd_step);
        const VectorXd s = z_new - p.z;
        const VectorXd y = g_new - g;
        const double sy = s.dot(y);
        const double improvement = p.f - f_new;
        p.z = z_new;
        p.f = f_new;
        g = g_new;
        if (sy > 1e-12 * s.norm() * y.norm()) {
            const double r = 1.0 / sy;
            const MatrixXd I = MatrixXd::Identity(n, n);
            inv_h = (I - r * s * y.transpose()) * inv_h * (I - r * y * s.transpose()) + r * s * s.transpose();
        }
        if (improvement <= 1e-14 * (1.0 + std::abs(p.f)) && s.lpNorm<Eigen::Infinity>() < 1e-10) {
            p.converged = true;
            break;
        }
    }
    return p;
}

}  // namespace

BoxTransform::BoxTransform(std::vector<Bound> bounds) : bounds_(std::move(bounds)) {
    for (const auto& b : bounds_) {
        if (!(b.upper > b.lower)) {
            fail(ErrorCode::Input, "optimizer bound with upper <= lower");
        }
    }
}

VectorXd BoxTransform::to_internal(const VectorXd& x) const {
    VectorXd z(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const auto& b = bounds_[static_cast<std::size_t>(i)];
        if (std::isinf(b.upper)) {
            z(i) = std::log(std::max(x(i) - b.lower, 1e-300));
        } else {
            const double width = b.upper - b.lower;
            const double inner = std::clamp(x(i), b.lower + 1e-9 * width, b.upper - 1e-9 * width);
            z(i) = std::log((inner - b.lower) / (b.upper - inner));
        }
    }
    return z;
}

VectorXd BoxTransform::to_external(const VectorXd& z) const {
    VectorXd x(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        const auto& b = bounds_[static_cast<std::size_t>(i)];
        // exp(-700) is still a normal double, so half-open boxes stay open at the lower end.
        x(i) = std::isinf(b.upper) ? b.lower + std::exp(std::max(z(i), -700.0))
                                   : b.lower + (b.upper - b.lower) * logistic(z(i));
    }
    return x;
}

Result maximize(const Objective& objective, const VectorXd& start, const std::vector<Bound>& bounds,
                const Options& options, const std::vector<VectorXd>& extra_starts) {
    if (static_cast<std::size_t>(start.size()) != bounds.size()) {
        fail(ErrorCode::Dimension, "start vector and bounds differ in length");
    }
    const BoxTransform transform(bounds);
    InternalProblem f(objective, transform);

    std::vector<VectorXd> starts;
    starts.push_back(transform.to_internal(start));
    for (const auto& s : extra_starts) {
        starts.push_back(transform.to_internal(s));
    }
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal(0.0, options.jitter);
    while (static_cast<int>(starts.size()) < options.starts) {
        VectorXd z = starts.front();
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            z(i) += normal(rng);
        }
        starts.push_back(std::move(z));
    }

    Result result;
    Point best{starts.front(), f(starts.front()), false};
    result.start_value = -best.f;
    result.best_start = 0;
    for (std::size_t s = 0; s < starts.size(); ++s) {
        const double f0 = f(starts[s]);
        if (!std::isfinite(f0)) {
            continue;
        }
        Point p = nelder_mead(f, starts[s], f0, options);
        // A second simplex pass from the optimum guards against premature collapse.
        Point again = nelder_mead(f, p.z, p.f, options);
        if (again.f <= p.f) {
            again.converged = again.converged || p.converged;
            p = again;
        }
        Point polished = bfgs(f, p, options);
        if (polished.f <= p.f) {
            polished.converged = polished.converged || p.converged;
            p = polished;
        }
        if (p.f < best.f || (s == 0 && p.f <= best.f)) {
            best = p;
            result.best_start = static_cast<int>(s);
        }
    }
    result.x = transform.to_external(best.z);
    result.value = std::isfinite(best.f) ? -best.f : kNegInf;
    result.converged = best.converged && std::isfinite(best.f);
    result.evaluations = f.evaluations();
    return result;
}

}  // namespace hdh::optim
