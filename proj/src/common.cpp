#include "hdheavy/common.hpp"

#include <cmath>

namespace hdh {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::Schema: return "schema";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::Gap: return "gap";
    case ErrorCode::DegenerateMonth: return "degenerate_month";
    case ErrorCode::ParameterExplosion: return "parameter_explosion";
    case ErrorCode::PdViolation: return "pd_violation";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::DataQuality: return "data_quality";
    case ErrorCode::Dimension: return "dimension";
    case ErrorCode::Estimation: return "estimation";
    case ErrorCode::Input: return "input";
    case ErrorCode::Config: return "config";
    case ErrorCode::Solver: return "solver";
    case ErrorCode::Io: return "io";
    }
    return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

bool is_pd(const MatrixXd& m, double margin) {
    if (m.rows() != m.cols() || !m.allFinite()) {
        return false;
    }
    MatrixXd shifted = m;
    shifted.diagonal().array() -= margin;
    Eigen::LLT<MatrixXd> llt(shifted);
    return llt.info() == Eigen::Success;
}

double min_eigenvalue(const MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double max_asymmetry(const MatrixXd& m) { return (m - m.transpose()).cwiseAbs().maxCoeff(); }

MatrixXd to_correlation(const MatrixXd& m) {
    const VectorXd inv_sd = m.diagonal().cwiseSqrt().cwiseInverse();
    MatrixXd out = inv_sd.asDiagonal() * m * inv_sd.asDiagonal();
    out.diagonal().setOnes();
    return out;
}

VectorXd vech(const MatrixXd& m) {
    const Eigen::Index n = m.rows();
    VectorXd out(n * (n + 1) / 2);
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j; i < n; ++i) {
            out(k++) = m(i, j);
        }
    }
    return out;
}

bool cholesky_in_place(MatrixXd& a) {
    const Eigen::Index n = a.rows();
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = a(j, j);
        for (Eigen::Index k = 0; k < j; ++k) {
            d -= a(j, k) * a(j, k);
        }
        if (!(d > 0.0)) {
            return false;
        }
        const double l = std::sqrt(d);
        a(j, j) = l;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (Eigen::Index k = 0; k < j; ++k) {
                s -= a(i, k) * a(j, k);
            }
            a(i, j) = s / l;
        }
    }
    return true;
}

double cholesky_logdet(const MatrixXd& chol) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < chol.rows(); ++i) {
        s += std::log(chol(i, i));
    }
    return 2.0 * s;
}

void cholesky_solve_in_place(const MatrixXd& chol, VectorXd& b) {
    const Eigen::Index n = chol.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = b(i);
        for (Eigen::Index k = 0; k < i; ++k) {
            s -= chol(i, k) * b(k);
        }
        b(i) = s / chol(i, i);
    }
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        double s = b(i);
        for (Eigen::Index k = i + 1; k < n; ++k) {
            s -= chol(k, i) * b(k);
        }
        b(i) = s / chol(i, i);
    }
}

double cholesky_quadratic(const MatrixXd& chol, const VectorXd& x, VectorXd& work) {
    const Eigen::Index n = chol.rows();
    double q = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = x(i);
        for (Eigen::Index k = 0; k < i; ++k) {
            s -= chol(i, k) * work(k);
        }
        work(i) = s / chol(i, i);
        q += work(i) * work(i);
    }
    return q;
}

double mean(const VectorXd& v) { return v.size() == 0 ? 0.0 : v.mean(); }

double stddev(const VectorXd& v) {
    if (v.size() < 2) {
        return 0.0;
    }
    const double mu = v.mean();
    return std::sqrt((v.array() - mu).square().sum() / static_cast<double>(v.size() - 1));
}

}  // namespace hdh
