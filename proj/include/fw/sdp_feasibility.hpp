#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fw/spectahedron.hpp"

namespace fw {

/// Symmetric matrix stored as a list of entries covering both triangles.
class SparseSymMatrix {
 public:
  SparseSymMatrix() = default;
  explicit SparseSymMatrix(Index n) : n_(n) {}
  static SparseSymMatrix from_dense(const Mat& a, double drop = 0.0);

  /// Adds v at (i, j) and, for i != j, at (j, i).
  void add(Index i, Index j, double v);

  Index dim() const { return n_; }
  std::size_t nnz() const { return val_.size(); }
  void apply(const Vec& x, Vec& y, double scale = 1.0) const;  ///< y += scale A x
  double quad(const Vec& v) const;                             ///< v^T A v
  Mat to_dense() const;
  double frobenius() const;

 private:
  Index n_ = 0;
  std::vector<Index> row_;
  std::vector<Index> col_;
  std::vector<double> val_;
};

/// find X in t * spectahedron with A_i . X <= b_i for all i.
struct FeasibilitySDP {
  Index n = 0;
  double t = 1.0;
  std::vector<SparseSymMatrix> a;
  Vec b;
  std::optional<SparseSymMatrix> objective;  ///< C for binary_search_objective

  std::size_t m() const { return a.size(); }
  void validate() const;
  /// A_i . X for every constraint, from the factors.
  Vec constraint_values(const FactoredPSD& x) const;
  double max_violation(const FactoredPSD& x) const;
};

/// Plain-text problem file:
///
///   n 10
///   t 1
///   constraint -2      # starts A_i with b_i = -2
///   0 0 -1             # i j value, 0-based; off-diagonal entries mirrored
///   ...
///   objective          # optional: C to maximize, entries as above
///
/// `#` starts a comment.
FeasibilitySDP parse_feasibility_sdp(std::istream& in, const std::string& name = "<stream>");
FeasibilitySDP load_feasibility_sdp(const std::string& path);
void write_feasibility_sdp(std::ostream& out, const FeasibilitySDP& sdp);

struct SoftMaxValue {
  double f = 0.0;
  Vec weights;  ///< nonnegative, sum to one
};

/// (1/sigma) log sum exp(sigma (a_i - b_i)), shifted by the largest term.
SoftMaxValue softmax_eval(const Vec& a, const Vec& b, double sigma);

/// log(m) / eps, or 1 / eps when m = 1.
double softmax_sigma(std::size_t m, double eps);

/// The soft-max potential of an SDP as an objective over t * spectahedron.
class SoftMaxObjective final : public SpectralObjective {
 public:
  SoftMaxObjective(const FeasibilitySDP& sdp, double sigma);

  Index dim() const override { return sdp_->n; }
  std::unique_ptr<SpectralState> make_state(const FactoredPSD& x0) const override;
  /// sigma t^2 max_i ||A_i||_2^2.
  std::optional<double> curvature_bound(double t) const override;

  const FeasibilitySDP& sdp() const { return *sdp_; }
  double sigma() const { return sigma_; }
  double max_spectral_norm() const { return max_norm_; }

 private:
  const FeasibilitySDP* sdp_;
  double sigma_;
  double max_norm_ = 0.0;
};

enum class FeasStatus { feasible, infeasible, undetermined };

std::string to_string(FeasStatus s);

struct FeasOptions {
  /// Eigen-call budget factor: ceil(budget_factor * max(log m, 1) / eps^2).
  double budget_factor = 20.0;
  std::optional<int> max_iters;  ///< overrides the budget
  /// Dense eigensolver for the LMO up to this size; the power method with
  /// accuracy eps / 4 above it.
  Index dense_lmo_limit = 200;
  std::uint64_t seed = 0;
};

struct FeasResult {
  FeasStatus status = FeasStatus::undetermined;
  FactoredPSD x;
  double f = 0.0;
  double max_violation = 0.0;
  /// Certified lower bound on min f over the domain (f - gap - tolerance, best seen).
  double lower_bound = -kInf;
  /// Every X in the domain violates some constraint by at least this much
  /// (lower_bound - log(m) / sigma); positive only for infeasible instances.
  double violation_lower_bound = -kInf;
  double sigma = 0.0;
  double curvature = 0.0;
  int eigen_calls = 0;
  int budget = 0;
  RunTrace trace;
};

/// Hazan's algorithm with line search on the soft-max potential. Stops as
/// soon as f(X) <= eps (all violations <= eps) or the certified lower bound
/// on min f exceeds eps (no X is eps-feasible for the potential).
FeasResult solve_eps_feasible(const FeasibilitySDP& sdp, double eps, const FeasOptions& opt = {});

struct BinarySearchResult {
  FactoredPSD x;        ///< eps-feasible iterate for the last accepted guess
  double objective = 0.0;  ///< C . x
  double lo = 0.0;      ///< largest accepted guess
  double hi = 0.0;      ///< smallest rejected (or undetermined) guess
  int rounds = 0;
  int undetermined = 0;  ///< rounds that neither found nor excluded a point
  bool found = false;
};

/// max C . X over the constraints by bisecting the guess gamma with the extra
/// constraint -C . X <= -gamma. The default range is +-2 ||C||_F t.
BinarySearchResult binary_search_objective(const SparseSymMatrix& c, const FeasibilitySDP& sdp, double eps,
                                           std::optional<std::pair<double, double>> range = std::nullopt,
                                           int max_rounds = 30, const FeasOptions& opt = {});

}  // namespace fw
