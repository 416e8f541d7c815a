#include "gds/recovery.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "gds/error.hpp"
#include "json.hpp"

namespace gds {

RegularizerPoly RegularizerPoly::monomial(int degree) {
  if (degree < 0) fail(ErrorCode::InvalidArgument, "degree must be >= 0");
  RegularizerPoly g;
  g.coeffs = Eigen::VectorXd::Zero(degree + 1);
  g.coeffs[degree] = 1.0;
  return g;
}

double RegularizerPoly::operator()(double theta) const {
  if (coeffs.size() == 0) return 0.0;
  double acc = coeffs[coeffs.size() - 1];
  for (Eigen::Index i = coeffs.size() - 2; i >= 0; --i) acc = acc * theta + coeffs[i];
  return acc;
}

std::string RegularizerPoly::describe() const {
  // Compact form for the common monomial case.
  int nonzero = 0, top = -1;
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i] != 0.0) {
      ++nonzero;
      top = static_cast<int>(i);
    }
  }
  if (nonzero == 0) return "0";
  if (nonzero == 1 && coeffs[top] == 1.0)
    return top == 0 ? "1" : (top == 1 ? "theta" : "theta^" + std::to_string(top));
  std::ostringstream os;
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i] == 0.0) continue;
    if (os.tellp() > 0) os << " + ";
    os << coeffs[i];
    if (i == 1) os << "*theta";
    if (i > 1) os << "*theta^" << i;
  }
  return os.str();
}

void RegularizerPoly::validate(double theta_max) const {
  if (coeffs.size() == 0) fail(ErrorCode::InvalidArgument, "empty regularizer polynomial");
  const int grid = 257;
  const double scale = std::max(1.0, std::abs((*this)(theta_max)));
  double prev = (*this)(0.0);
  if (prev < -1e-12 * scale)
    fail(ErrorCode::InvalidArgument, "regularizer polynomial is negative at 0");
  for (int i = 1; i < grid; ++i) {
    const double theta = theta_max * static_cast<double>(i) / (grid - 1);
    const double val = (*this)(theta);
    if (val < -1e-12 * scale)
      fail(ErrorCode::InvalidArgument, "regularizer polynomial is negative on the spectrum range");
    if (val < prev - 1e-12 * scale)
      fail(ErrorCode::InvalidArgument, "regularizer polynomial is decreasing on the spectrum range");
    prev = val;
  }
}

std::string RecoveryResult::to_json() const {
  nlohmann::json j;
  const Eigen::Index n = w_aug.size() / 2;
  j["x0"] = std::vector<double>(w_aug.data(), w_aug.data() + n);
  j["w"] = std::vector<double>(w_aug.data() + n, w_aug.data() + 2 * n);
  j["v_star"] = std::vector<double>(v_star.data(), v_star.data() + v_star.size());
  j["residual"] = residual;
  nlohmann::json d;
  auto put = [&d](const char* key, double v) {
    if (std::isfinite(v)) d[key] = v;
  };
  put("c", diagnostics.c);
  put("C", diagnostics.C);
  put("R", diagnostics.R);
  put("gamma", diagnostics.gamma);
  put("delta", diagnostics.delta);
  put("achieved_residual", diagnostics.achieved_residual);
  if (!diagnostics.g_desc.empty()) d["g"] = diagnostics.g_desc;
  d["iterations"] = diagnostics.iterations;
  d["converged"] = diagnostics.converged;
  d["rank_deficient"] = diagnostics.rank_deficient;
  if (diagnostics.rank >= 0) d["rank"] = diagnostics.rank;
  j["diagnostics"] = d;
  return j.dump(2);
}

Eigen::MatrixXd assemble_design_matrix(const SpectralBasis& basis, const ShiftSpectrum& shift,
                                       int k, const SamplingPlan& plan, const SampleSet& set) {
  if (k < 1 || k > basis.n()) fail(ErrorCode::InvalidArgument, "bandwidth k out of range");
  if (set.s() != plan.s()) fail(ErrorCode::InvalidArgument, "sample set / plan horizon mismatch");

  Eigen::MatrixXd B(set.total(), 2 * k);
  const Eigen::VectorXd lam = shift.lambda.head(k);
  Eigen::VectorXd lam_pow = Eigen::VectorXd::Ones(k);
  Eigen::VectorXd lam_bar = Eigen::VectorXd::Zero(k);
  Eigen::Index row = 0;
  for (int t = 0; t < plan.s(); ++t) {
    const double mt = static_cast<double>(plan.count(t));
    for (int idx : set.omega[t]) {
      const double scale = 1.0 / std::sqrt(mt * plan.P()(idx, t));
      const auto u = basis.U.row(idx).head(k);
      B.row(row).head(k) = scale * u.cwiseProduct(lam_pow.transpose());
      B.row(row).tail(k) = scale * u.cwiseProduct(lam_bar.transpose());
      ++row;
    }
    lam_bar += lam_pow;
    lam_pow = lam_pow.cwiseProduct(lam);
  }
  return B;
}

RecoveryResult recover_known_basis(const Measurements& meas, const SampleSet& set,
                                   const SamplingPlan& plan, const AffineSystem& sys, int k) {
  const int n = sys.n();
  if (meas.z.size() != set.total()) fail(ErrorCode::InvalidArgument, "measurement length mismatch");
  if (set.s() != sys.horizon()) fail(ErrorCode::InvalidArgument, "sample set horizon mismatch");

  const WeightedSamplingOperator op(set, plan);
  const Eigen::MatrixXd B = assemble_design_matrix(sys.basis(), sys.shift(), k, plan, set);
  const Eigen::VectorXd target = op.weight(meas.z);

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(B);
  const Eigen::VectorXd v = cod.solve(target);

  RecoveryResult result;
  result.v_star = v;
  result.w_aug.resize(2 * n);
  result.w_aug.head(n) = sys.basis().U.leftCols(k) * v.head(k);
  result.w_aug.tail(n) = sys.basis().U.leftCols(k) * v.tail(k);
  result.residual = (B * v - target).norm();

  const StabilityBounds bounds = stability_bounds(sys, k);
  result.diagnostics.c = bounds.c;
  result.diagnostics.C = bounds.C;
  result.diagnostics.R = op.norm();
  result.diagnostics.rank = static_cast<int>(cod.rank());
  result.diagnostics.rank_deficient = cod.rank() < 2 * k;
  result.diagnostics.iterations = 0;
  result.diagnostics.converged = true;
  return result;
}

CrResult conjugate_residual(const LinOp& op, const Eigen::VectorXd& b, double tol,
                            int max_iters) {
  CrResult out;
  out.x = Eigen::VectorXd::Zero(b.size());
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    out.converged = true;
    return out;
  }

  Eigen::VectorXd r = b;
  Eigen::VectorXd p = r;
  Eigen::VectorXd Ar = op(r);
  Eigen::VectorXd Ap = Ar;
  double rAr = r.dot(Ar);
  double rnorm = bnorm;
  out.residual_history.push_back(rnorm / bnorm);

  Eigen::VectorXd best_x = out.x;
  double best_rnorm = rnorm;

  for (int it = 0; it < max_iters; ++it) {
    const double ap2 = Ap.squaredNorm();
    if (!(ap2 > 0.0) || !(rAr > 0.0)) break;  // semidefinite breakdown
    const double alpha = rAr / ap2;
    out.x += alpha * p;
    r -= alpha * Ap;
    rnorm = r.norm();
    out.residual_history.push_back(rnorm / bnorm);
    ++out.iterations;
    if (rnorm < best_rnorm) {
      best_rnorm = rnorm;
      best_x = out.x;
    }
    if (rnorm <= tol * bnorm) {
      out.converged = true;
      break;
    }
    Ar = op(r);
    const double rAr_next = r.dot(Ar);
    const double beta = rAr_next / rAr;
    p = r + beta * p;
    Ap = Ar + beta * Ap;
    rAr = rAr_next;
  }

  out.x = best_x;
  out.relative_residual = best_rnorm / bnorm;
  if (out.relative_residual <= tol) out.converged = true;
  return out;
}

namespace {

// g applied to a block-diagonal pair of Laplacians by Horner evaluation.
Eigen::VectorXd apply_regularizer(const Eigen::SparseMatrix<double>& L, const RegularizerPoly& g,
                                  const Eigen::VectorXd& v) {
  const Eigen::Index n = L.rows();
  Eigen::VectorXd out(2 * n);
  for (int half = 0; half < 2; ++half) {
    const auto x = v.segment(half * n, n);
    Eigen::VectorXd acc = g.coeffs[g.coeffs.size() - 1] * x;
    for (Eigen::Index i = g.coeffs.size() - 2; i >= 0; --i) acc = L * acc + g.coeffs[i] * x;
    out.segment(half * n, n) = acc;
  }
  return out;
}

double gershgorin_bound(const Eigen::SparseMatrix<double>& L) {
  Eigen::VectorXd bound = Eigen::VectorXd::Zero(L.rows());
  for (int col = 0; col < L.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(L, col); it; ++it)
      bound[it.row()] += std::abs(it.value());
  return bound.maxCoeff();
}

}  // namespace

RecoveryResult recover_regularized(const Measurements& meas, const SampleSet& set,
                                   const SamplingPlan& plan, const LinOp& apply_shift,
                                   const Eigen::SparseMatrix<double>& laplacian,
                                   const RegularizerPoly& g, double gamma, int s,
                                   const SolverOptions& opts) {
  const int n = static_cast<int>(laplacian.rows());
  if (laplacian.rows() != laplacian.cols()) fail(ErrorCode::InvalidArgument, "Laplacian must be square");
  if (!(gamma > 0.0)) fail(ErrorCode::InvalidArgument, "gamma must be positive");
  if (s != plan.s() || set.s() != s) fail(ErrorCode::InvalidArgument, "horizon mismatch");
  if (meas.z.size() != set.total()) fail(ErrorCode::InvalidArgument, "measurement length mismatch");
  g.validate(gershgorin_bound(laplacian));

  const WeightedSamplingOperator op(set, plan);

  // Forward map M v: run the affine recurrence on [x0; w] and sample.
  auto forward = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd x = v.head(n);
    const Eigen::VectorXd w = v.tail(n);
    Eigen::VectorXd out(op.rows());
    Eigen::Index row = 0;
    for (int t = 0; t < s; ++t) {
      for (int idx : set.omega[t]) {
        out[row] = op.row_scales()[row] * x[idx];
        ++row;
      }
      if (t + 1 < s) x = apply_shift(x) + w;
    }
    return out;
  };

  // Adjoint M^T y via the reversed recurrence on the augmented state.
  auto adjoint = [&](const Eigen::VectorXd& y) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd bsum = Eigen::VectorXd::Zero(n);
    Eigen::Index row = op.rows();
    for (int t = s - 1; t >= 0; --t) {
      Eigen::VectorXd q = Eigen::VectorXd::Zero(n);
      const auto& nodes = set.omega[t];
      row -= static_cast<Eigen::Index>(nodes.size());
      for (std::size_t j = 0; j < nodes.size(); ++j)
        q[nodes[j]] += op.row_scales()[row + static_cast<Eigen::Index>(j)] *
                       y[row + static_cast<Eigen::Index>(j)];
      bsum += a;
      a = apply_shift(a) + q;
    }
    Eigen::VectorXd out(2 * n);
    out.head(n) = a;
    out.tail(n) = bsum;
    return out;
  };

  auto normal_op = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd out = adjoint(forward(v));
    out += gamma * apply_regularizer(laplacian, g, v);
    return out;
  };

  const Eigen::VectorXd rhs = adjoint(op.weight(meas.z));
  const int max_iters = opts.max_iters > 0 ? opts.max_iters : 10 * n;
  const CrResult cr = conjugate_residual(normal_op, rhs, opts.tol, max_iters);

  RecoveryResult result;
  result.w_aug = cr.x;
  result.v_star = cr.x;
  result.residual = (forward(cr.x) - op.weight(meas.z)).norm();
  result.diagnostics.R = op.norm();
  result.diagnostics.gamma = gamma;
  result.diagnostics.g_desc = g.describe();
  result.diagnostics.iterations = cr.iterations;
  result.diagnostics.converged = cr.converged;
  result.diagnostics.achieved_residual = cr.relative_residual;
  return result;
}

bool BoundReport::all_satisfied() const {
  for (const BoundCheck& c : checks)
    if (!c.satisfied) return false;
  return true;
}

std::string BoundReport::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const BoundCheck& c : checks)
    j.push_back({{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"satisfied", c.satisfied}});
  return j.dump(2);
}

BoundReport check_error_bounds(const RecoveryResult& result, const Eigen::VectorXd& truth,
                               const Measurements& meas, const SampleSet& set,
                               const SamplingPlan& plan, const AffineSystem& sys, int k,
                               double delta, const RegularizerPoly* g, double gamma) {
  const int n = sys.n();
  if (truth.size() != 2 * n || result.w_aug.size() != 2 * n)
    fail(ErrorCode::InvalidArgument, "truth / result length mismatch");
  if (!(delta > 0.0) || delta >= 1.0) fail(ErrorCode::InvalidArgument, "delta must lie in (0,1)");

  const WeightedSamplingOperator op(set, plan);
  const double wpe = op.weight(meas.e).norm();
  const double c_k = stability_bounds(sys, k).c;
  if (!(c_k > 0.0))
    fail(ErrorCode::InvalidArgument, "degenerate horizon: lower stability constant is zero");
  const double denom = std::sqrt((1.0 - delta) * c_k);

  auto make_check = [](const std::string& name, double lhs, double rhs) {
    BoundCheck c;
    c.name = name;
    c.lhs = lhs;
    c.rhs = rhs;
    c.satisfied = lhs <= rhs * (1.0 + 1e-9) + 1e-12;
    return c;
  };

  BoundReport report;
  if (g == nullptr) {
    report.checks.push_back(
        make_check("least_squares_noise", (result.w_aug - truth).norm(), 2.0 / denom * wpe));
    return report;
  }

  if (k >= n) fail(ErrorCode::InvalidArgument, "off-band bounds need k < n");
  const double g_k = (*g)(sys.basis().theta[k - 1]);
  const double g_k1 = (*g)(sys.basis().theta[k]);
  if (!(g_k1 > 0.0)) fail(ErrorCode::InvalidArgument, "regularizer must be positive at theta_{k+1}");
  if (!(gamma > 0.0)) fail(ErrorCode::InvalidArgument, "gamma must be positive");

  const Eigen::MatrixXd Uk = sys.basis().U.leftCols(k);
  Eigen::VectorXd alpha_star(2 * n);
  alpha_star.head(n) = Uk * (Uk.transpose() * result.w_aug.head(n));
  alpha_star.tail(n) = Uk * (Uk.transpose() * result.w_aug.tail(n));
  const Eigen::VectorXd beta_star = result.w_aug - alpha_star;

  const double R = op.norm();
  const double C_n = stability_bounds(sys, n).C;
  const double ratio = std::sqrt(g_k / g_k1);
  const double truth_norm = truth.norm();

  report.checks.push_back(make_check(
      "in_band_error", (alpha_star - truth).norm(),
      (2.0 + R * C_n / std::sqrt(gamma * g_k1)) / denom * wpe +
          (R * C_n * ratio + std::sqrt(gamma * g_k)) / denom * truth_norm));
  report.checks.push_back(make_check("off_band_energy", beta_star.norm(),
                                     wpe / std::sqrt(gamma * g_k1) + ratio * truth_norm));
  if (wpe == 0.0) {
    report.checks.push_back(make_check(
        "noiseless_total", (result.w_aug - truth).norm(),
        ((R * C_n * ratio + std::sqrt(gamma * g_k)) / denom + ratio) * truth_norm));
  }
  return report;
}

}  // namespace gds
