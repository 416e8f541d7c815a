#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gds/dynamics.hpp"
#include "gds/rng.hpp"
#include "gds/spectral.hpp"

namespace gds {

enum class Regime {
  Fixed = 1,       // one node set drawn from p_0 and reused at every time step
  TimeVarying = 2  // node sets redrawn independently at each time step
};

/// Per-time sampling distributions and draw counts. Columns of P are
/// probability vectors over the nodes (all entries positive); the Fixed
/// regime requires identical columns and equal counts.
class SamplingPlan {
 public:
  SamplingPlan(Regime regime, Eigen::MatrixXd P, std::vector<int> counts,
               std::uint64_t seed = 0);

  /// Uniform distributions with M total samples split evenly over s steps.
  static SamplingPlan uniform_total(Regime regime, int n, int s, long long total,
                                    std::uint64_t seed = 0);
  /// Uniform distributions with a fixed per-step count.
  static SamplingPlan uniform_per_step(Regime regime, int n, int s, int per_step,
                                       std::uint64_t seed = 0);

  Regime regime() const { return regime_; }
  int n() const { return static_cast<int>(P_.rows()); }
  int s() const { return static_cast<int>(P_.cols()); }
  const Eigen::MatrixXd& P() const { return P_; }
  Eigen::VectorXd p(int t) const { return P_.col(t); }
  const std::vector<int>& counts() const { return counts_; }
  int count(int t) const { return counts_[static_cast<std::size_t>(t)]; }
  long long total_count() const;
  std::uint64_t seed() const { return seed_; }

 private:
  Regime regime_;
  Eigen::MatrixXd P_;
  std::vector<int> counts_;
  std::uint64_t seed_ = 0;
};

/// Drawn node indices per time step (with repetition).
struct SampleSet {
  std::vector<std::vector<int>> omega;

  int s() const { return static_cast<int>(omega.size()); }
  long long total() const;
  /// Occurrence counts as an n x s matrix of integers.
  Eigen::MatrixXi count_matrix(int n) const;
};

/// Observed values z grouped per time step, with the realized noise retained
/// for bound diagnostics.
struct Measurements {
  Eigen::VectorXd z;
  double sigma = 0.0;
  Eigen::VectorXd e;
};

struct CoherenceReport {
  std::optional<double> regime1;
  Eigen::VectorXd regime2;      // nu at each t
  Eigen::VectorXd upper_bound;  // per-t bound dominating regime2
};

SampleSet draw_samples(const SamplingPlan& plan, Rng& rng);

/// Samples the trajectory (columns = time steps) at the drawn nodes and adds
/// i.i.d. N(0, sigma^2) noise.
Measurements measure(const Eigen::MatrixXd& trajectory, const SampleSet& set, double sigma,
                     Rng& rng);

/// Worst-case probability-weighted leverage of a node at time t:
/// max_l (1/p_t(l)) * sum_{j<=k} U(l,j)^2 (lambda_j^{2t} + lbar_j(t)^2).
double coherence_regime2(const SpectralBasis& basis, const ShiftSpectrum& shift, int k, int t,
                         const Eigen::VectorXd& p_t);

/// Horizon-summed leverage: max_l (1/p0(l)) lambda_max(sum_t a_t a_t^T) with
/// a_t = [Lambda_k^t u; LambdaBar_k^t u], u = U_k^T delta_l. Computed through
/// the s x s Gram matrix of the a_t.
double coherence_regime1(const SpectralBasis& basis, const ShiftSpectrum& shift, int k, int s,
                         const Eigen::VectorXd& p0);

/// max_i ||U_k^T delta_i||^2 / p(i) * max_j (lambda_j^{2t} + lbar_j(t)^2);
/// dominates coherence_regime2 on every instance.
double coherence_upper_bound(const SpectralBasis& basis, const ShiftSpectrum& shift, int k, int t,
                             const Eigen::VectorXd& p_t);

CoherenceReport coherence_report(const SpectralBasis& basis, const ShiftSpectrum& shift, int k,
                                 const SamplingPlan& plan);

/// ceil(3 nu / (c delta^2) * ln(4k / eps)); the per-step draw count that
/// guarantees the restricted isometry with probability >= 1 - eps.
long long sample_complexity(double nu, double c, int k, double delta, double eps);

/// The composed weighting-reweighting-selection map applied blockwise to a
/// stacked trajectory: row (t, j) reads node omega_{j,t} of block t scaled by
/// 1 / (sqrt(m_t) sqrt(p_t(omega_{j,t}))). Matrix-free apply and adjoint; the
/// exact operator norm comes from the per-(t, node) draw multiplicities.
class WeightedSamplingOperator {
 public:
  WeightedSamplingOperator(const SampleSet& set, const SamplingPlan& plan);

  int n() const { return n_; }
  int s() const { return s_; }
  long long rows() const { return total_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& stacked) const;
  Eigen::VectorXd adjoint(const Eigen::VectorXd& y) const;

  /// Scales measurement-space vectors (the W P part alone).
  Eigen::VectorXd weight(const Eigen::VectorXd& y) const;

  /// Exact spectral norm: sqrt(max_{t,v} count_{t,v} / (m_t p_t(v))).
  double norm() const { return norm_; }

  const std::vector<double>& row_scales() const { return scales_; }
  const std::vector<std::vector<int>>& omega() const { return omega_; }

 private:
  int n_ = 0;
  int s_ = 0;
  long long total_ = 0;
  std::vector<std::vector<int>> omega_;
  std::vector<double> scales_;  // flattened per row, t-major
  double norm_ = 0.0;
};

/// Coefficient-space Gram matrix X = B^T B (2k x 2k) of the weighted sampled
/// embedding, accumulated over draw multiplicities.
Eigen::MatrixXd sampled_embedding_gram(const SpectralBasis& basis, const ShiftSpectrum& shift,
                                       int k, const SamplingPlan& plan, const SampleSet& set);

struct RipReport {
  double c = 0.0;
  double C = 0.0;
  double ratio_min = 0.0;        // exact over the bandlimited subspace
  double ratio_max = 0.0;
  double probe_min = 0.0;        // Monte-Carlo probes
  double probe_max = 0.0;
  double delta_lower = 0.0;      // 1 - ratio_min / c
  double delta_upper = 0.0;      // ratio_max / C - 1
  bool passes(double delta) const;
};

/// Empirical two-sided isometry check of the weighted sampled embedding on
/// the k-bandlimited subspace: exact extremes from the reduced Gram plus
/// `trials` random bandlimited probes.
RipReport rip_check(const AffineSystem& sys, int k, const SamplingPlan& plan,
                    const SampleSet& set, int trials, Rng& rng);

/// JSON round-trip for a draw and its measurements:
/// {"omega": [[...],...], "z": [...], "sigma": s, "seed": n}.
std::string samples_to_json(const SampleSet& set, const Measurements& meas, std::uint64_t seed);
void samples_from_json(const std::string& text, SampleSet& set, Measurements& meas,
                       std::uint64_t& seed);

}  // namespace gds
