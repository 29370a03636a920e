#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "fw/eigen_solvers.hpp"
#include "fw/frank_wolfe.hpp"
#include "fw/rng.hpp"

namespace fw {

/// X = t * sum_j w_j v_j v_j^T with unit v_j and weights summing to one.
class FactoredPSD {
 public:
  FactoredPSD() = default;
  FactoredPSD(Vec v, double t);

  Index dim() const { return n_; }
  double scale() const { return t_; }
  std::size_t size() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<Vec>& vectors() const { return vectors_; }
  int iterations() const { return k_; }

  /// X <- (1 - alpha) X + alpha t v v^T (v normalized here).
  void blend(double alpha, const Vec& v);

  Mat to_dense() const;
  double weight_sum() const;
  /// X . G computed from the factors: t sum_j w_j v_j^T G v_j (one matvec per atom).
  double inner(const SymmetricOperator& g) const;
  /// X y without forming X.
  Vec apply(const Vec& y) const;

 private:
  Index n_ = 0;
  double t_ = 1.0;
  std::vector<double> weights_;
  std::vector<Vec> vectors_;
  int k_ = 0;
};

/// Per-run state of a convex objective over t * spectahedron. States are
/// created by a SpectralObjective and own everything that changes with X.
class SpectralState {
 public:
  virtual ~SpectralState() = default;
  virtual double value() const = 0;
  /// Gradient operator at the current X. Must carry frobenius or
  /// row_sum_bound so spectral_range_bound works. Valid until the next commit.
  virtual SymmetricOperator gradient() const = 0;
  /// X . grad f(X) when the state can compute it without matvecs.
  virtual std::optional<double> iterate_inner() const { return std::nullopt; }
  /// X <- (1 - alpha) X + alpha t v v^T.
  virtual void commit(double alpha, const Vec& v) = 0;
  /// phi(alpha) = f((1 - alpha) X + alpha t v v^T) and its derivative.
  virtual double value_along(double alpha, const Vec& v) const = 0;
  virtual double slope_along(double alpha, const Vec& v) const = 0;
  virtual std::optional<double> exact_line_search(const Vec&) const { return std::nullopt; }
  /// y = grad f((1 - beta) X + beta t v v^T) x, used by gradient averaging.
  virtual void apply_blended_gradient(double beta, const Vec& v, const Vec& x, Vec& y) const = 0;
  virtual std::unique_ptr<SpectralState> clone() const = 0;
};

class SpectralObjective {
 public:
  virtual ~SpectralObjective() = default;
  virtual Index dim() const = 0;
  virtual std::unique_ptr<SpectralState> make_state(const FactoredPSD& x0) const = 0;
  /// C_f over t * spectahedron, when known.
  virtual std::optional<double> curvature_bound(double t) const {
    (void)t;
    return std::nullopt;
  }
};

/// f over dense symmetric matrices.
struct DenseMatrixObjective {
  Index n = 0;
  std::function<double(const Mat&)> eval;
  std::function<Mat(const Mat&)> grad;
  /// sup lambda_max of the Hessian (C_f = 1/2 diam^2 * this, diam^2 = 2 t^2).
  std::optional<double> hessian_bound;
  std::function<double(const Mat& x, const Mat& s)> exact_line_search;
};

DenseMatrixObjective frobenius_sq_objective(Index n);                 ///< ||X||_F^2
DenseMatrixObjective frobenius_dist_objective(Mat target);             ///< ||X - X0||_F^2
DenseMatrixObjective matrix_linear_objective(Mat a);                   ///< A . X

/// Wraps a dense objective; keeps X as a dense matrix.
class DenseSpectralObjective final : public SpectralObjective {
 public:
  explicit DenseSpectralObjective(DenseMatrixObjective f) : f_(std::move(f)) {}
  Index dim() const override { return f_.n; }
  std::unique_ptr<SpectralState> make_state(const FactoredPSD& x0) const override;
  std::optional<double> curvature_bound(double t) const override;
  const DenseMatrixObjective& objective() const { return f_; }

 private:
  DenseMatrixObjective f_;
};

/// Answer of the spectahedron LMO: atom t v v^T.
struct SpectAtom {
  Vec v;
  double value = 0.0;      ///< t v^T G v
  double tolerance = 0.0;  ///< additive slack on value (t * eigen accuracy)
  std::size_t matvecs = 0;
};

/// Approximate minimizer of Y . G over t * spectahedron. eps is the additive
/// accuracy of the linear problem; eps = 0 uses the dense eigensolver.
SpectAtom spect_lmo(const SymmetricOperator& g, double eps, double t, CounterRng& rng, const EigOptions& opt = {});

struct GapEstimate {
  double estimate = 0.0;
  double tolerance = 0.0;  ///< true gap lies in [estimate, estimate + tolerance]
};

/// X . G - t lambda_min(G) with lambda_min approximated to eps2 / t.
GapEstimate spect_gap(const FactoredPSD& x, const SymmetricOperator& g, double eps2, CounterRng& rng);

class HazanModel;

struct HazanOptions {
  enum class Variant { plain, line_search, grad_averaging };
  Variant variant = Variant::plain;
  SolverOptions solver;  ///< schedule is forced to line search for those variants
  double t = 1.0;
  EigOptions eig;
  /// Per-step adjustment of the eigensolver (k, previous Rayleigh quotient).
  /// A fixed iteration count no longer certifies an accuracy, so rows then
  /// report an infinite tolerance.
  std::function<void(int k, double prev_rayleigh, EigOptions&)> eig_policy;
  std::uint64_t seed = 0;
  /// Start vector; e_1 when empty.
  Vec start;
  /// Called after every step with the new iteration count.
  std::function<void(int k, const HazanModel&)> on_step;
};

/// Frank-Wolfe model over t * spectahedron.
class HazanModel {
 public:
  struct Snapshot {
    FactoredPSD x;
    std::shared_ptr<const SpectralState> state;
  };

  HazanModel(const SpectralObjective& objective, const HazanOptions& opt);

  double value() const { return state_->value(); }
  Direction direction(double eps_prime);
  double line_search(int k);
  void step(double alpha);
  std::size_t matvecs() const { return matvecs_; }
  Snapshot snapshot() const { return {x_, std::shared_ptr<const SpectralState>(state_->clone())}; }
  void restore(const Snapshot& s);

  const FactoredPSD& iterate() const { return x_; }
  const SpectralState& state() const { return *state_; }
  double last_rayleigh() const { return prev_rayleigh_; }

 private:
  HazanOptions opt_;
  FactoredPSD x_;
  std::unique_ptr<SpectralState> state_;
  CounterRng rng_;
  Vec v_;
  double prev_rayleigh_ = 0.0;
  std::size_t matvecs_ = 0;
  int k_ = 0;
};

struct HazanResult {
  FactoredPSD x;
  RunTrace trace;
  double certified_gap = kInf;
  bool certified = false;
};

/// Hazan's algorithm with the schedule and variant from `opt`.
HazanResult hazan_run(const SpectralObjective& objective, const HazanOptions& opt);

/// Certified variant (approximate LMO, K = ceil(8 C / eps)).
HazanResult hazan_certified_run(const SpectralObjective& objective, double t, double eps,
                                std::uint64_t seed = 0, double curvature = -1.0);

// Rank lower-bound constructions for ||X||_F^2 on the spectahedron.
/// (1/k) diag(1,..,1,0,..,0) with k ones.
Mat uniform_rank_k(Index n, Index k);
/// Random trace-one PSD matrix of rank <= k.
FactoredPSD random_lowrank_spectahedron(Index n, Index k, CounterRng& rng);

}  // namespace fw
