#pragma once

#include <Eigen/Core>
#include <vector>

namespace gds {

struct MetricReport {
  double mae = 0.0;
  double mape = 0.0;
  double re = 0.0;
  long long n_eval = 0;   // entries evaluated
  long long excluded = 0;  // entries skipped by the MAPE zero-guard
};

double mae(const Eigen::VectorXd& x_star, const Eigen::VectorXd& x);

/// Mean absolute percentage error; entries with |x(i)| < 1e-12 are skipped
/// and counted separately.
double mape(const Eigen::VectorXd& x_star, const Eigen::VectorXd& x, long long* excluded = nullptr);

/// ||x* - x|| / ||x||; errors on zero ground-truth norm.
double relative_error(const Eigen::VectorXd& x_star, const Eigen::VectorXd& x);

MetricReport metric_report(const Eigen::VectorXd& x_star, const Eigen::VectorXd& x);

// Statistical summaries for trial sweeps.

/// Linear-interpolation percentile, p in [0, 1].
double percentile(std::vector<double> values, double p);
double median(const std::vector<double>& values);

/// Spearman rank correlation (average ranks on ties).
double spearman_rho(const std::vector<double>& x, const std::vector<double>& y);

/// Least-squares slope of y against x.
double linear_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace gds
