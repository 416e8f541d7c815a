#include "gds/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gds/error.hpp"

namespace gds {

namespace {

void check_lengths(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) fail(ErrorCode::InvalidArgument, "metric inputs must have equal length");
  if (a.size() == 0) fail(ErrorCode::InvalidArgument, "metric inputs must be nonempty");
}

}  // namespace

double mae(const Eigen::VectorXd& x_star, const Eigen::VectorXd& x) {
  check_lengths(x_star, x);
  return (x_star - x).cwiseAbs().mean();
}

double mape(const Eigen::VectorXd& x_star, const Eigen::VectorXd& x, long long* excluded) {
  check_lengths(x_star, x);
  double acc = 0.0;
  long long used = 0, skipped = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) < 1e-12) {
      ++skipped;
      continue;
    }
    acc += std::abs((x_star[i] - x[i]) / x[i]);
    ++used;
  }
  if (excluded) *excluded = skipped;
  return used > 0 ? acc / static_cast<double>(used) : std::numeric_limits<double>::quiet_NaN();
}

double relative_error(const Eigen::VectorXd& x_star, const Eigen::VectorXd& x) {
  check_lengths(x_star, x);
  const double norm = x.norm();
  if (!(norm > 0.0)) fail(ErrorCode::InvalidArgument, "relative error needs nonzero ground truth");
  return (x_star - x).norm() / norm;
}

MetricReport metric_report(const Eigen::VectorXd& x_star, const Eigen::VectorXd& x) {
  MetricReport report;
  report.mae = mae(x_star, x);
  report.mape = mape(x_star, x, &report.excluded);
  report.re = relative_error(x_star, x);
  report.n_eval = static_cast<long long>(x.size()) - report.excluded;
  return report;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) fail(ErrorCode::InvalidArgument, "percentile of empty sample");
  if (p < 0.0 || p > 1.0) fail(ErrorCode::InvalidArgument, "percentile level must lie in [0,1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

double median(const std::vector<double>& values) { return percentile(values, 0.5); }

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) rank[order[t]] = avg;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    fail(ErrorCode::InvalidArgument, "spearman needs two samples of equal length >= 2");
  const std::vector<double> rx = ranks(x);
  const std::vector<double> ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0))
    fail(ErrorCode::InvalidArgument, "spearman undefined for constant samples");
  return sxy / std::sqrt(sxx * syy);
}

double linear_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    fail(ErrorCode::InvalidArgument, "slope needs two samples of equal length >= 2");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (!(sxx > 0.0)) fail(ErrorCode::InvalidArgument, "slope undefined for constant abscissae");
  return sxy / sxx;
}

}  // namespace gds
