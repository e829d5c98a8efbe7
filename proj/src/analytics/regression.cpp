#include "lendsim/analytics/regression.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

#include "lendsim/error.hpp"

namespace lendsim::analytics {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd to_eigen(const Matrix& m) {
    MatrixXd out(m.rows, m.cols);
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < m.cols; ++c) out(r, c) = m(r, c);
    }
    return out;
}

std::vector<std::string> default_names(std::vector<std::string> names, std::size_t k) {
    if (names.empty()) {
        for (std::size_t i = 0; i < k; ++i) names.push_back("x" + std::to_string(i));
    }
    if (names.size() != k) throw Error(Errc::InvalidArgument, "one name per column required");
    return names;
}

void check_shape(const Matrix& x, std::span<const double> y) {
    if (x.rows != y.size()) throw Error(Errc::InvalidArgument, "row count differs from dependent length");
    if (x.cols == 0) throw Error(Errc::InvalidArgument, "no regressors");
    if (x.rows <= x.cols) throw Error(Errc::InsufficientHistory, "need more rows than columns");
    for (double v : x.data) {
        if (!std::isfinite(v)) throw Error(Errc::InvalidArgument, "non-finite regressor");
    }
    for (double v : y) {
        if (!std::isfinite(v)) throw Error(Errc::InvalidArgument, "non-finite dependent value");
    }
}

void check_rank(const MatrixXd& x) {
    MatrixXd scaled = x;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const double m = x.col(c).cwiseAbs().maxCoeff();
        if (m > 0.0) scaled.col(c) /= m;
    }
    Eigen::ColPivHouseholderQR<MatrixXd> qr(scaled);
    if (qr.rank() < x.cols()) throw Error(Errc::RankDeficient, "regressors are collinear");
}

void fill_inference(RegressionResult& r, const VectorXd& beta, const MatrixXd& cov) {
    const auto k = static_cast<std::size_t>(beta.size());
    r.coef.resize(k);
    r.se.resize(k);
    r.t.resize(k);
    r.p.resize(k);
    r.covariance.resize(k * k);
    for (std::size_t i = 0; i < k; ++i) {
        r.coef[i] = beta(static_cast<Eigen::Index>(i));
        for (std::size_t j = 0; j < k; ++j) {
            const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
            r.covariance[i * k + j] = 0.5 * (cov(a, b) + cov(b, a));
        }
        const double var = cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
        r.se[i] = std::sqrt(std::max(var, 0.0));
        if (r.se[i] > 0.0) {
            r.t[i] = r.coef[i] / r.se[i];
            r.p[i] = std::erfc(std::abs(r.t[i]) / std::sqrt(2.0));
        } else {
            r.t[i] = r.coef[i] == 0.0 ? 0.0 : std::copysign(INFINITY, r.coef[i]);
            r.p[i] = r.coef[i] == 0.0 ? 1.0 : 0.0;
        }
    }
}

}  // namespace

RegressionResult ols_newey_west(const Matrix& x, std::span<const double> y, int lag, std::vector<std::string> names) {
    check_shape(x, y);
    if (lag < 0) throw Error(Errc::InvalidArgument, "lag must be non-negative");
    const MatrixXd X = to_eigen(x);
    check_rank(X);
    const auto n = X.rows();
    const auto k = X.cols();
    const VectorXd Y = Eigen::Map<const VectorXd>(y.data(), n);

    const MatrixXd xtx_inv = (X.transpose() * X).inverse();
    const VectorXd beta = xtx_inv * (X.transpose() * Y);
    const VectorXd u = Y - X * beta;

    MatrixXd S = MatrixXd::Zero(k, k);
    for (Eigen::Index t = 0; t < n; ++t) S += u(t) * u(t) * X.row(t).transpose() * X.row(t);
    for (int l = 1; l <= lag && l < n; ++l) {
        const double w = 1.0 - static_cast<double>(l) / static_cast<double>(lag + 1);
        MatrixXd G = MatrixXd::Zero(k, k);
        for (Eigen::Index t = l; t < n; ++t) G += u(t) * u(t - l) * X.row(t).transpose() * X.row(t - l);
        S += w * (G + G.transpose());
    }
    MatrixXd cov = xtx_inv * S * xtx_inv;
    cov = 0.5 * (cov + cov.transpose());

    RegressionResult r;
    r.method = lag == 0 ? "OLS, HC0 standard errors" : "OLS, Newey-West standard errors (lag " + std::to_string(lag) + ")";
    r.names = default_names(std::move(names), static_cast<std::size_t>(k));
    r.observations = static_cast<std::size_t>(n);
    fill_inference(r, beta, cov);
    r.residuals.assign(u.data(), u.data() + n);
    const double mean = Y.mean();
    const double tss = (Y.array() - mean).square().sum();
    r.r_squared = tss > 0.0 ? 1.0 - u.squaredNorm() / tss : 1.0;
    return r;
}

RegressionResult logistic_clustered(const Matrix& x, std::span<const double> y,
                                    std::span<const std::uint32_t> clusters, std::vector<std::string> names) {
    check_shape(x, y);
    if (clusters.size() != y.size()) throw Error(Errc::InvalidArgument, "one cluster id per row required");
    double positives = 0.0;
    for (double v : y) {
        if (v != 0.0 && v != 1.0) throw Error(Errc::InvalidArgument, "labels must be 0 or 1");
        positives += v;
    }
    std::map<std::uint32_t, Eigen::Index> cluster_index;
    for (std::uint32_t c : clusters) cluster_index.emplace(c, 0);
    if (cluster_index.size() < 2) throw Error(Errc::InvalidArgument, "need at least two clusters");
    Eigen::Index next = 0;
    for (auto& [id, idx] : cluster_index) idx = next++;

    const MatrixXd X = to_eigen(x);
    check_rank(X);
    const auto n = X.rows();
    const auto k = X.cols();
    const VectorXd Y = Eigen::Map<const VectorXd>(y.data(), n);
    if (positives == 0.0 || positives == static_cast<double>(n)) {
        throw Error(Errc::PerfectSeparation, "all labels are identical");
    }

    auto separated = [&](const VectorXd& eta) {
        if (eta.cwiseAbs().maxCoeff() <= 35.0) return false;
        for (Eigen::Index i = 0; i < n; ++i) {
            if ((eta(i) > 0.0) != (Y(i) == 1.0)) return false;
        }
        return true;
    };

    VectorXd beta = VectorXd::Zero(k);
    VectorXd p(n);
    MatrixXd H(k, k);
    int iterations = 0;
    bool converged = false;
    while (iterations < kLogitMaxIterations) {
        const VectorXd eta = X * beta;
        if (separated(eta)) throw Error(Errc::PerfectSeparation, "labels are perfectly separated");
        p = eta.unaryExpr([](double e) { return 1.0 / (1.0 + std::exp(-e)); });
        const VectorXd w = p.array() * (1.0 - p.array());
        H = X.transpose() * w.asDiagonal() * X;
        const VectorXd g = X.transpose() * (Y - p);
        Eigen::LDLT<MatrixXd> ldlt(H);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
            throw Error(Errc::NonConvergence, "information matrix is not positive definite");
        }
        const VectorXd step = ldlt.solve(g);
        beta += step;
        ++iterations;
        if (!step.allFinite()) throw Error(Errc::NonConvergence, "Newton step is not finite");
        if (step.cwiseAbs().maxCoeff() < kLogitTolerance) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        const VectorXd eta = X * beta;
        bool extreme = false;
        bool all_right = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (std::abs(eta(i)) <= 35.0) continue;
            extreme = true;
            if ((eta(i) > 0.0) != (Y(i) == 1.0)) all_right = false;
        }
        if (extreme && all_right) throw Error(Errc::PerfectSeparation, "labels are quasi-completely separated");
        throw Error(Errc::NonConvergence, "no convergence within 100 iterations");
    }
    const VectorXd eta = X * beta;
    if (separated(eta)) throw Error(Errc::PerfectSeparation, "labels are perfectly separated");
    p = eta.unaryExpr([](double e) { return 1.0 / (1.0 + std::exp(-e)); });
    const VectorXd w = p.array() * (1.0 - p.array());
    H = X.transpose() * w.asDiagonal() * X;
    const MatrixXd H_inv = H.inverse();

    MatrixXd scores = MatrixXd::Zero(static_cast<Eigen::Index>(cluster_index.size()), k);
    for (Eigen::Index i = 0; i < n; ++i) {
        scores.row(cluster_index.at(clusters[static_cast<std::size_t>(i)])) += (Y(i) - p(i)) * X.row(i);
    }
    const MatrixXd meat = scores.transpose() * scores;
    MatrixXd cov = H_inv * meat * H_inv;
    cov = 0.5 * (cov + cov.transpose());

    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        ll += Y(i) == 1.0 ? std::log(p(i)) : std::log1p(-p(i));
    }
    const double rate = positives / static_cast<double>(n);
    const double ll0 = static_cast<double>(n) * (rate * std::log(rate) + (1.0 - rate) * std::log1p(-rate));

    RegressionResult r;
    r.method = "Logit, standard errors clustered by address";
    r.names = default_names(std::move(names), static_cast<std::size_t>(k));
    r.observations = static_cast<std::size_t>(n);
    r.clusters = cluster_index.size();
    r.iterations = iterations;
    r.log_likelihood = ll;
    r.r_squared = 1.0 - ll / ll0;
    fill_inference(r, beta, cov);
    r.residuals.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) r.residuals[static_cast<std::size_t>(i)] = Y(i) - p(i);
    return r;
}

RegressionResult fit(const FeatureMatrix& features, int lag) {
    RegressionResult r = ols_newey_west(features.x, features.y, lag, features.columns);
    r.dependent = features.dependent;
    return r;
}

RegressionResult fit_logit(const FeatureMatrix& features) {
    RegressionResult r = logistic_clustered(features.x, features.y, features.clusters, features.columns);
    r.dependent = features.dependent;
    return r;
}

std::string stars(double p) {
    if (p < 0.01) return "***";
    if (p < 0.05) return "**";
    if (p < 0.10) return "*";
    return "";
}

std::string format_table(const RegressionResult& r) {
    std::size_t width = 12;
    for (const auto& name : r.names) width = std::max(width, name.size() + 2);
    std::ostringstream out;
    out << "Dependent variable: " << (r.dependent.empty() ? "y" : r.dependent) << '\n';
    out << r.method << '\n';
    out << std::string(width + 18, '-') << '\n';
    out << std::fixed << std::setprecision(4);
    for (std::size_t i = 0; i < r.names.size(); ++i) {
        std::ostringstream coef;
        coef << std::fixed << std::setprecision(4) << r.coef[i] << stars(r.p[i]);
        std::ostringstream se;
        se << std::fixed << std::setprecision(4) << '(' << r.se[i] << ')';
        out << std::left << std::setw(static_cast<int>(width)) << r.names[i] << std::right << std::setw(18)
            << coef.str() << '\n';
        out << std::setw(static_cast<int>(width)) << "" << std::setw(18) << se.str() << '\n';
    }
    out << std::string(width + 18, '-') << '\n';
    out << std::left << std::setw(static_cast<int>(width)) << "Observations" << std::right << std::setw(18)
        << r.observations << '\n';
    if (r.clusters > 0) {
        out << std::left << std::setw(static_cast<int>(width)) << "Clusters" << std::right << std::setw(18)
            << r.clusters << '\n';
        out << std::left << std::setw(static_cast<int>(width)) << "Pseudo R2" << std::right << std::setw(18)
            << r.r_squared << '\n';
    } else {
        out << std::left << std::setw(static_cast<int>(width)) << "R2" << std::right << std::setw(18) << r.r_squared
            << '\n';
    }
    out << "* p<0.10, ** p<0.05, *** p<0.01\n";
    return out.str();
}

void write_csv(std::ostream& out, const RegressionResult& r) {
    out << "term,coef,se,t,p,stars\n";
    for (std::size_t i = 0; i < r.names.size(); ++i) {
        out << r.names[i] << ',' << std::setprecision(17) << r.coef[i] << ',' << r.se[i] << ',' << r.t[i] << ','
            << r.p[i] << ',' << stars(r.p[i]) << '\n';
    }
}

}  // namespace lendsim::analytics
