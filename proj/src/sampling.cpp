#include "gds/sampling.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "gds/error.hpp"
#include "json.hpp"

namespace gds {

namespace {

// Per-mode factors lambda_j^{2t} + lbar_j(t)^2 for j < k.
Eigen::VectorXd mode_factors(const ShiftSpectrum& shift, int k, int t) {
  Eigen::VectorXd fac(k);
  for (int j = 0; j < k; ++j) {
    const double lam = shift.lambda[j];
    const double lp = std::pow(lam, t);
    const double lb = lambda_bar(lam, t);
    fac[j] = lp * lp + lb * lb;
  }
  return fac;
}

void check_coherence_args(const SpectralBasis& basis, const ShiftSpectrum& shift, int k,
                          const Eigen::VectorXd& p) {
  if (k < 1 || k > basis.n()) fail(ErrorCode::InvalidArgument, "bandwidth k out of range");
  if (shift.n() != basis.n()) fail(ErrorCode::InvalidArgument, "spectrum size mismatch");
  if (p.size() != basis.n()) fail(ErrorCode::InvalidArgument, "distribution length mismatch");
  if (p.minCoeff() <= 0.0)
    fail(ErrorCode::InvalidArgument, "sampling distribution must be entrywise positive");
}

}  // namespace

SamplingPlan::SamplingPlan(Regime regime, Eigen::MatrixXd P, std::vector<int> counts,
                           std::uint64_t seed)
    : regime_(regime), P_(std::move(P)), counts_(std::move(counts)), seed_(seed) {
  const int n = static_cast<int>(P_.rows());
  const int s = static_cast<int>(P_.cols());
  if (n < 1 || s < 1) fail(ErrorCode::InvalidArgument, "plan needs n >= 1 and s >= 1");
  if (static_cast<int>(counts_.size()) != s)
    fail(ErrorCode::InvalidArgument, "one draw count per time step required");
  for (int t = 0; t < s; ++t) {
    if (counts_[t] < 1) fail(ErrorCode::InvalidArgument, "draw counts must be >= 1");
    if (P_.col(t).minCoeff() <= 0.0)
      fail(ErrorCode::InvalidArgument, "sampling distributions must be entrywise positive");
    if (std::abs(P_.col(t).sum() - 1.0) > 1e-12)
      fail(ErrorCode::InvalidArgument, "column " + std::to_string(t) + " of P does not sum to 1");
  }
  if (regime_ == Regime::Fixed) {
    for (int t = 1; t < s; ++t) {
      if (counts_[t] != counts_[0])
        fail(ErrorCode::InvalidArgument, "fixed regime requires equal per-step counts");
      if ((P_.col(t) - P_.col(0)).cwiseAbs().maxCoeff() > 0.0)
        fail(ErrorCode::InvalidArgument, "fixed regime requires identical distributions");
    }
  }
}

SamplingPlan SamplingPlan::uniform_total(Regime regime, int n, int s, long long total,
                                         std::uint64_t seed) {
  if (s < 1) fail(ErrorCode::InvalidArgument, "s must be >= 1");
  if (total < s || total % s != 0)
    fail(ErrorCode::InvalidArgument, "total sample count " + std::to_string(total) +
                                         " is not divisible by s=" + std::to_string(s));
  return uniform_per_step(regime, n, s, static_cast<int>(total / s), seed);
}

SamplingPlan SamplingPlan::uniform_per_step(Regime regime, int n, int s, int per_step,
                                            std::uint64_t seed) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Constant(n, s, 1.0 / n);
  return SamplingPlan(regime, std::move(P), std::vector<int>(s, per_step), seed);
}

long long SamplingPlan::total_count() const {
  long long total = 0;
  for (int c : counts_) total += c;
  return total;
}

long long SampleSet::total() const {
  long long total = 0;
  for (const auto& o : omega) total += static_cast<long long>(o.size());
  return total;
}

Eigen::MatrixXi SampleSet::count_matrix(int n) const {
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(n, s());
  for (int t = 0; t < s(); ++t)
    for (int idx : omega[t]) {
      if (idx < 0 || idx >= n) fail(ErrorCode::InvalidArgument, "sample index out of range");
      counts(idx, t) += 1;
    }
  return counts;
}

SampleSet draw_samples(const SamplingPlan& plan, Rng& rng) {
  const int s = plan.s();
  SampleSet set;
  set.omega.resize(s);

  auto draw_column = [&](int t, int count) {
    std::vector<double> cdf(plan.n());
    double acc = 0.0;
    for (int i = 0; i < plan.n(); ++i) {
      acc += plan.P()(i, t);
      cdf[i] = acc;
    }
    std::vector<int> out(count);
    for (int j = 0; j < count; ++j) out[j] = rng.categorical(cdf);
    return out;
  };

  if (plan.regime() == Regime::Fixed) {
    const std::vector<int> fixed = draw_column(0, plan.count(0));
    for (int t = 0; t < s; ++t) set.omega[t] = fixed;
  } else {
    for (int t = 0; t < s; ++t) set.omega[t] = draw_column(t, plan.count(t));
  }
  return set;
}

Measurements measure(const Eigen::MatrixXd& trajectory, const SampleSet& set, double sigma,
                     Rng& rng) {
  if (sigma < 0.0) fail(ErrorCode::InvalidArgument, "sigma must be >= 0");
  if (trajectory.cols() != set.s())
    fail(ErrorCode::InvalidArgument, "trajectory length does not match sample set");
  const int n = static_cast<int>(trajectory.rows());

  Measurements meas;
  meas.sigma = sigma;
  meas.z.resize(set.total());
  meas.e.resize(set.total());
  Eigen::Index row = 0;
  for (int t = 0; t < set.s(); ++t) {
    for (int idx : set.omega[t]) {
      if (idx < 0 || idx >= n) fail(ErrorCode::InvalidArgument, "sample index out of range");
      const double noise = sigma > 0.0 ? rng.normal(sigma) : 0.0;
      meas.e[row] = noise;
      meas.z[row] = trajectory(idx, t) + noise;
      ++row;
    }
  }
  return meas;
}

double coherence_regime2(const SpectralBasis& basis, const ShiftSpectrum& shift, int k, int t,
                         const Eigen::VectorXd& p_t) {
  check_coherence_args(basis, shift, k, p_t);
  if (t < 0) fail(ErrorCode::InvalidArgument, "t must be >= 0");
  const Eigen::VectorXd fac = mode_factors(shift, k, t);
  const Eigen::VectorXd leverage =
      (basis.U.leftCols(k).array().square().matrix() * fac).cwiseQuotient(p_t);
  return leverage.maxCoeff();
}

double coherence_regime1(const SpectralBasis& basis, const ShiftSpectrum& shift, int k, int s,
                         const Eigen::VectorXd& p0) {
  check_coherence_args(basis, shift, k, p0);
  if (s < 1) fail(ErrorCode::InvalidArgument, "s must be >= 1");
  const int n = basis.n();

  // Powers and partial sums per (mode, t).
  Eigen::MatrixXd lam_pow(k, s), lam_bar(k, s);
  for (int j = 0; j < k; ++j) {
    const double lam = shift.lambda[j];
    double lp = 1.0, lb = 0.0;
    for (int t = 0; t < s; ++t) {
      lam_pow(j, t) = lp;
      lam_bar(j, t) = lb;
      lb += lp;
      lp *= lam;
    }
  }

  double nu = 0.0;
  Eigen::MatrixXd gram(s, s);
  for (int l = 0; l < n; ++l) {
    const Eigen::VectorXd u2 = basis.U.row(l).head(k).array().square();
    // Gram of the per-time vectors a_t = [Lambda^t u; LambdaBar^t u]: the
    // nonzero spectrum of sum_t a_t a_t^T equals that of this s x s matrix.
    for (int t = 0; t < s; ++t) {
      for (int tp = t; tp < s; ++tp) {
        double acc = 0.0;
        for (int j = 0; j < k; ++j)
          acc += u2[j] * (lam_pow(j, t) * lam_pow(j, tp) + lam_bar(j, t) * lam_bar(j, tp));
        gram(t, tp) = acc;
        gram(tp, t) = acc;
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    nu = std::max(nu, es.eigenvalues().maxCoeff() / p0[l]);
  }
  return nu;
}

double coherence_upper_bound(const SpectralBasis& basis, const ShiftSpectrum& shift, int k, int t,
                             const Eigen::VectorXd& p_t) {
  check_coherence_args(basis, shift, k, p_t);
  const Eigen::VectorXd row_energy = basis.U.leftCols(k).array().square().rowwise().sum();
  const double worst_row = (row_energy.cwiseQuotient(p_t)).maxCoeff();
  return worst_row * mode_factors(shift, k, t).maxCoeff();
}

CoherenceReport coherence_report(const SpectralBasis& basis, const ShiftSpectrum& shift, int k,
                                 const SamplingPlan& plan) {
  CoherenceReport report;
  report.regime2.resize(plan.s());
  report.upper_bound.resize(plan.s());
  for (int t = 0; t < plan.s(); ++t) {
    report.regime2[t] = coherence_regime2(basis, shift, k, t, plan.p(t));
    report.upper_bound[t] = coherence_upper_bound(basis, shift, k, t, plan.p(t));
  }
  if (plan.regime() == Regime::Fixed)
    report.regime1 = coherence_regime1(basis, shift, k, plan.s(), plan.p(0));
  return report;
}

long long sample_complexity(double nu, double c, int k, double delta, double eps) {
  if (!(c > 0.0))
    fail(ErrorCode::InvalidArgument, "lower stability constant must be positive (degenerate horizon?)");
  if (nu < 0.0) fail(ErrorCode::InvalidArgument, "coherence must be nonnegative");
  if (!(delta > 0.0) || delta >= 1.0) fail(ErrorCode::InvalidArgument, "delta must lie in (0,1)");
  if (!(eps > 0.0) || eps >= 1.0) fail(ErrorCode::InvalidArgument, "eps must lie in (0,1)");
  if (k < 1) fail(ErrorCode::InvalidArgument, "k must be >= 1");
  const double m = 3.0 * nu / (c * delta * delta) * std::log(4.0 * k / eps);
  return static_cast<long long>(std::ceil(m));
}

WeightedSamplingOperator::WeightedSamplingOperator(const SampleSet& set, const SamplingPlan& plan)
    : n_(plan.n()), s_(plan.s()), omega_(set.omega) {
  if (set.s() != plan.s()) fail(ErrorCode::InvalidArgument, "sample set / plan horizon mismatch");
  total_ = set.total();
  scales_.reserve(static_cast<std::size_t>(total_));
  double norm2 = 0.0;
  const Eigen::MatrixXi counts = set.count_matrix(n_);
  for (int t = 0; t < s_; ++t) {
    if (static_cast<int>(set.omega[t].size()) != plan.count(t))
      fail(ErrorCode::InvalidArgument, "sample counts do not match plan");
    const double mt = static_cast<double>(plan.count(t));
    for (int idx : set.omega[t]) scales_.push_back(1.0 / std::sqrt(mt * plan.P()(idx, t)));
    for (int v = 0; v < n_; ++v) {
      if (counts(v, t) > 0)
        norm2 = std::max(norm2, counts(v, t) / (mt * plan.P()(v, t)));
    }
  }
  norm_ = std::sqrt(norm2);
}

Eigen::VectorXd WeightedSamplingOperator::apply(const Eigen::VectorXd& stacked) const {
  if (stacked.size() != static_cast<Eigen::Index>(n_) * s_)
    fail(ErrorCode::InvalidArgument, "stacked vector must have length s*n");
  Eigen::VectorXd out(total_);
  Eigen::Index row = 0;
  for (int t = 0; t < s_; ++t) {
    const auto block = stacked.segment(static_cast<Eigen::Index>(t) * n_, n_);
    for (int idx : omega_[t]) {
      out[row] = scales_[row] * block[idx];
      ++row;
    }
  }
  return out;
}

Eigen::VectorXd WeightedSamplingOperator::adjoint(const Eigen::VectorXd& y) const {
  if (y.size() != total_) fail(ErrorCode::InvalidArgument, "length mismatch in adjoint");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_) * s_);
  Eigen::Index row = 0;
  for (int t = 0; t < s_; ++t) {
    auto block = out.segment(static_cast<Eigen::Index>(t) * n_, n_);
    for (int idx : omega_[t]) {
      block[idx] += scales_[row] * y[row];
      ++row;
    }
  }
  return out;
}

Eigen::VectorXd WeightedSamplingOperator::weight(const Eigen::VectorXd& y) const {
  if (y.size() != total_) fail(ErrorCode::InvalidArgument, "length mismatch in weighting");
  Eigen::VectorXd out(total_);
  for (Eigen::Index r = 0; r < total_; ++r) out[r] = scales_[r] * y[r];
  return out;
}

Eigen::MatrixXd sampled_embedding_gram(const SpectralBasis& basis, const ShiftSpectrum& shift,
                                       int k, const SamplingPlan& plan, const SampleSet& set) {
  if (k < 1 || k > basis.n()) fail(ErrorCode::InvalidArgument, "bandwidth k out of range");
  const int n = basis.n();
  const int s = plan.s();
  const Eigen::MatrixXi counts = set.count_matrix(n);

  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(2 * k, 2 * k);
  Eigen::VectorXd row(2 * k);
  Eigen::VectorXd lam_pow = Eigen::VectorXd::Ones(k);
  Eigen::VectorXd lam_bar = Eigen::VectorXd::Zero(k);
  const Eigen::VectorXd lam = shift.lambda.head(k);
  for (int t = 0; t < s; ++t) {
    const double mt = static_cast<double>(plan.count(t));
    for (int v = 0; v < n; ++v) {
      const int c = counts(v, t);
      if (c == 0) continue;
      const auto u = basis.U.row(v).head(k);
      row.head(k) = u.transpose().cwiseProduct(lam_pow);
      row.tail(k) = u.transpose().cwiseProduct(lam_bar);
      X.selfadjointView<Eigen::Lower>().rankUpdate(row, c / (mt * plan.P()(v, t)));
    }
    lam_bar += lam_pow;
    lam_pow = lam_pow.cwiseProduct(lam);
  }
  return X.selfadjointView<Eigen::Lower>();
}

bool RipReport::passes(double delta) const {
  const double tol = 1e-9;
  return ratio_min >= (1.0 - delta) * c * (1.0 - tol) &&
         ratio_max <= (1.0 + delta) * C * (1.0 + tol);
}

RipReport rip_check(const AffineSystem& sys, int k, const SamplingPlan& plan,
                    const SampleSet& set, int trials, Rng& rng) {
  if (trials < 1) fail(ErrorCode::InvalidArgument, "trials must be >= 1");
  RipReport report;
  const StabilityBounds bounds = stability_bounds(sys, k);
  report.c = bounds.c;
  report.C = bounds.C;

  const Eigen::MatrixXd X = sampled_embedding_gram(sys.basis(), sys.shift(), k, plan, set);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X, Eigen::EigenvaluesOnly);
  report.ratio_min = std::max(es.eigenvalues().minCoeff(), 0.0);
  report.ratio_max = es.eigenvalues().maxCoeff();

  const WeightedSamplingOperator op(set, plan);
  const int n = sys.n();
  double pmin = std::numeric_limits<double>::infinity();
  double pmax = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    Eigen::VectorXd w_aug(2 * n);
    w_aug.head(n) = random_bandlimited(sys.basis(), k, rng);
    w_aug.tail(n) = random_bandlimited(sys.basis(), k, rng);
    const double denom = w_aug.squaredNorm();
    const double ratio = op.apply(apply_pi(sys, k, w_aug)).squaredNorm() / denom;
    pmin = std::min(pmin, ratio);
    pmax = std::max(pmax, ratio);
  }
  report.probe_min = pmin;
  report.probe_max = pmax;
  report.delta_lower = report.c > 0.0 ? 1.0 - report.ratio_min / report.c : 1.0;
  report.delta_upper = report.C > 0.0 ? report.ratio_max / report.C - 1.0 : 0.0;
  return report;
}

std::string samples_to_json(const SampleSet& set, const Measurements& meas, std::uint64_t seed) {
  nlohmann::json j;
  j["omega"] = set.omega;
  j["z"] = std::vector<double>(meas.z.data(), meas.z.data() + meas.z.size());
  j["sigma"] = meas.sigma;
  j["seed"] = seed;
  return j.dump(2);
}

void samples_from_json(const std::string& text, SampleSet& set, Measurements& meas,
                       std::uint64_t& seed) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& ex) {
    fail(ErrorCode::Parse, std::string("invalid samples JSON: ") + ex.what());
  }
  if (!j.contains("omega") || !j.contains("z") || !j.contains("sigma") || !j.contains("seed"))
    fail(ErrorCode::Parse, "samples JSON must contain omega, z, sigma, seed");
  set.omega = j["omega"].get<std::vector<std::vector<int>>>();
  const auto z = j["z"].get<std::vector<double>>();
  meas.z = Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
  meas.sigma = j["sigma"].get<double>();
  meas.e = Eigen::VectorXd::Zero(meas.z.size());
  seed = j["seed"].get<std::uint64_t>();
  if (meas.z.size() != set.total())
    fail(ErrorCode::Parse, "samples JSON: z length does not match omega");
}

}  // namespace gds
