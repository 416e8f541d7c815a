#include <Eigen/Dense>

#include "doctest.h"
#include "gds/error.hpp"
#include "gds/metrics.hpp"
#include "gds/rng.hpp"

using namespace gds;

TEST_CASE("metric formulas on the worked examples") {
  Eigen::Vector2d a(1, 2), b(1, 4);
  CHECK(mae(a, b) == doctest::Approx(1.0));

  Eigen::VectorXd s(1), t(1);
  s << 2;
  t << 4;
  CHECK(mape(s, t) == doctest::Approx(0.5));

  Eigen::Vector2d u(0, 3), v(0, 4);
  CHECK(relative_error(u, v) == doctest::Approx(0.25));
}

TEST_CASE("metrics: zero iff equal, scale behaviour") {
  Rng rng(2);
  Eigen::VectorXd x(16), y(16);
  for (int i = 0; i < 16; ++i) {
    x[i] = rng.normal() + 2.0;
    y[i] = rng.normal() + 2.0;
  }
  CHECK(mae(x, x) == 0.0);
  CHECK(mape(x, x) == 0.0);
  CHECK(relative_error(x, x) == 0.0);
  CHECK(mae(x, y) > 0.0);

  // MAE scales with the data; MAPE and RE are scale invariant.
  const double c = 7.5;
  CHECK(mae(c * x, c * y) == doctest::Approx(c * mae(x, y)).epsilon(1e-12));
  CHECK(mape(c * x, c * y) == doctest::Approx(mape(x, y)).epsilon(1e-12));
  CHECK(relative_error(c * x, c * y) ==
        doctest::Approx(relative_error(x, y)).epsilon(1e-12));
}

TEST_CASE("metrics: zero guards") {
  Eigen::Vector3d x_star(1, 2, 3);
  Eigen::Vector3d x(0, 2, 3);
  long long excluded = 0;
  const double m = mape(x_star, x, &excluded);
  CHECK(excluded == 1);
  CHECK(m == doctest::Approx(0.0));

  const MetricReport report = metric_report(x_star, x);
  CHECK(report.excluded == 1);
  CHECK(report.n_eval == 3);

  CHECK_THROWS_AS(relative_error(x_star, Eigen::Vector3d::Zero()), Error);
  CHECK_THROWS_AS(mae(x_star, Eigen::Vector2d(1, 2)), Error);
}

TEST_CASE("percentiles and median") {
  std::vector<double> v{4.0, 1.0, 3.0, 2.0};
  CHECK(median(v) == doctest::Approx(2.5));
  CHECK(percentile(v, 0.0) == doctest::Approx(1.0));
  CHECK(percentile(v, 1.0) == doctest::Approx(4.0));
  CHECK(percentile(v, 0.25) == doctest::Approx(1.75));
  CHECK_THROWS_AS(percentile({}, 0.5), Error);
}

TEST_CASE("spearman rank correlation") {
  std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> inc{2, 4, 5, 7, 9};
  std::vector<double> dec{9, 7, 5, 4, 2};
  CHECK(spearman_rho(x, inc) == doctest::Approx(1.0));
  CHECK(spearman_rho(x, dec) == doctest::Approx(-1.0));
  std::vector<double> mixed{3, 1, 4, 2, 5};
  const double rho = spearman_rho(x, mixed);
  CHECK(rho > -1.0);
  CHECK(rho < 1.0);
  CHECK_THROWS_AS(spearman_rho(x, std::vector<double>{1, 1, 1, 1, 1}), Error);
}

TEST_CASE("least squares slope") {
  std::vector<double> x{0, 1, 2, 3};
  std::vector<double> y{1, 3, 5, 7};
  CHECK(linear_slope(x, y) == doctest::Approx(2.0));
  CHECK_THROWS_AS(linear_slope({1, 1}, {2, 3}), Error);
}
