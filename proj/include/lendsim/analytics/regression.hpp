#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lendsim/analytics/features.hpp"

namespace lendsim::analytics {

struct RegressionResult {
    std::string method;
    std::string dependent;
    std::vector<std::string> names;
    std::vector<double> coef;
    std::vector<double> se;
    std::vector<double> t;
    std::vector<double> p;        // two-sided, normal approximation
    std::vector<double> covariance;  // row-major k x k
    std::vector<double> residuals;   // OLS residuals; logit response residuals y - p
    std::size_t observations = 0;
    std::size_t clusters = 0;
    double r_squared = 0.0;  // McFadden pseudo R-squared for logit
    double log_likelihood = 0.0;
    int iterations = 0;
};

/// OLS with a Newey-West covariance using Bartlett weights 1 - l/(lag+1).
/// Lag 0 gives the HC0 covariance.
RegressionResult ols_newey_west(const Matrix& x, std::span<const double> y, int lag = 1,
                                std::vector<std::string> names = {});

inline constexpr double kLogitTolerance = 1e-10;
inline constexpr int kLogitMaxIterations = 100;

/// Logit fitted by iteratively reweighted least squares, with a sandwich
/// covariance built from per-cluster score sums.
RegressionResult logistic_clustered(const Matrix& x, std::span<const double> y,
                                    std::span<const std::uint32_t> clusters, std::vector<std::string> names = {});

RegressionResult fit(const FeatureMatrix& features, int lag = 1);
RegressionResult fit_logit(const FeatureMatrix& features);

/// "***" at 1%, "**" at 5%, "*" at 10%.
std::string stars(double p);
/// Coefficients with standard errors in parentheses underneath.
std::string format_table(const RegressionResult& result);
void write_csv(std::ostream& out, const RegressionResult& result);

}  // namespace lendsim::analytics
