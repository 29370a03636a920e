#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "fw/kernels.hpp"
#include "fw/spectahedron.hpp"
#include "fw/transforms.hpp"

namespace fw {

struct Rating {
  int i = 0;  ///< dense user index
  int j = 0;  ///< dense item index
  double y = 0.0;
};

struct RatingDataset {
  Index m = 0;
  Index n = 0;
  std::vector<Rating> train;
  std::vector<Rating> test;
  std::vector<long long> user_ids;  ///< original id of each dense user index
  std::vector<long long> item_ids;

  std::size_t size() const { return train.size() + test.size(); }
  /// Throws DataError on out-of-range indices or duplicate (i, j) within a split.
  void validate() const;
};

enum class MovieLensFormat { tab_100k, dat_1m };

MovieLensFormat parse_movielens_format(const std::string& s);

/// Reads `user item rating timestamp` lines (tab/space separated, or `::` for
/// dat_1m). Ids are remapped to dense 0-based indices in increasing id order.
/// Everything lands in `train`.
RatingDataset load_movielens(const std::string& path, MovieLensFormat format);
RatingDataset load_movielens(std::istream& in, MovieLensFormat format, const std::string& name = "<stream>");

struct SplitPolicy {
  enum class Kind { random_fraction, per_user_holdout };
  Kind kind = Kind::random_fraction;
  double train_fraction = 0.5;
  int holdout = 10;
  std::uint64_t seed = 0;

  static SplitPolicy random_fraction(double rho, std::uint64_t seed) { return {Kind::random_fraction, rho, 0, seed}; }
  static SplitPolicy per_user_holdout(int r, std::uint64_t seed) { return {Kind::per_user_holdout, 1.0, r, seed}; }
};

/// Re-splits all ratings of `data` (train and test pooled).
RatingDataset split_train_test(const RatingDataset& data, const SplitPolicy& policy);

/// Offsets (mu_i + mu_j) / 2 with means over the training ratings; rows or
/// columns without training ratings fall back to the global mean.
struct MeanNormalizer {
  Vec row_mean;
  Vec col_mean;
  double global_mean = 0.0;

  double offset(int i, int j) const { return 0.5 * (row_mean[i] + col_mean[j]); }
  double denormalize(double prediction, int i, int j) const { return prediction + offset(i, j); }
};

struct NormalizedDataset {
  RatingDataset data;  ///< both splits shifted by the offsets
  MeanNormalizer normalizer;
};

NormalizedDataset normalize_means(const RatingDataset& data);

struct ErrorMetrics {
  double rmse = 0.0;
  double nmae = 0.0;  ///< mean absolute error / (rating_max - rating_min)
};

ErrorMetrics metrics(const Vec& predictions, const std::vector<Rating>& ratings, double rating_range = 4.0);

/// Predictions X_ij kept only on the observed train and test positions.
class PredictionStore {
 public:
  PredictionStore() = default;
  PredictionStore(std::shared_ptr<const kernels::BipartitePattern> train,
                  std::shared_ptr<const kernels::BipartitePattern> test, double init);

  /// X_ij <- (1 - alpha) X_ij + alpha t v_i v_{m+j} on both splits.
  void blend(double alpha, double t, const Vec& v);
  /// Recompute every stored entry from the factored iterate.
  void recompute(const FactoredPSD& x);

  const Vec& train() const { return train_; }
  const Vec& test() const { return test_; }

 private:
  std::shared_ptr<const kernels::BipartitePattern> train_pattern_;
  std::shared_ptr<const kernels::BipartitePattern> test_pattern_;
  Vec train_;
  Vec test_;
};

/// alpha = sum (X - y)(X - s) / sum (X - s)^2 over the training entries,
/// s_ij = t v_i v_{m+j}, clamped to [0, 1]; 0 when the denominator vanishes.
double closed_form_alpha(const kernels::BipartitePattern& pattern, const Vec& values, const Vec& ratings,
                         const Vec& v, double t);

/// f(Z) = 1/2 sum_{train} (Z_ij - y_ij)^2 lifted to t * spectahedron of size m+n.
class MatcompObjective final : public SpectralObjective {
 public:
  explicit MatcompObjective(const RatingDataset& data);

  Index dim() const override { return m_ + n_; }
  Index m() const { return m_; }
  Index n() const { return n_; }
  std::unique_ptr<SpectralState> make_state(const FactoredPSD& x0) const override;
  /// t^2 (the Hessian is 1/2 on the observed off-diagonal pairs and diam^2 = 2 t^2).
  std::optional<double> curvature_bound(double t) const override { return t * t; }

  const kernels::BipartitePattern& train_pattern() const { return *train_; }
  const kernels::BipartitePattern& test_pattern() const { return *test_; }
  const Vec& train_ratings() const { return y_train_; }
  const Vec& test_ratings() const { return y_test_; }

  /// Dense f on the Z block, for small checks.
  RectObjective rect_objective() const;

 private:
  Index m_;
  Index n_;
  std::shared_ptr<const kernels::BipartitePattern> train_;
  std::shared_ptr<const kernels::BipartitePattern> test_;
  Vec y_train_;
  Vec y_test_;
};

/// The state created by MatcompObjective; exposes the prediction store.
class MatcompState final : public SpectralState {
 public:
  MatcompState(const MatcompObjective& obj, const FactoredPSD& x0);

  double value() const override;
  SymmetricOperator gradient() const override;
  std::optional<double> iterate_inner() const override;
  void commit(double alpha, const Vec& v) override;
  double value_along(double alpha, const Vec& v) const override;
  double slope_along(double alpha, const Vec& v) const override;
  std::optional<double> exact_line_search(const Vec& v) const override;
  void apply_blended_gradient(double beta, const Vec& v, const Vec& x, Vec& y) const override;
  std::unique_ptr<SpectralState> clone() const override { return std::make_unique<MatcompState>(*this); }

  const PredictionStore& store() const { return store_; }

 private:
  Vec candidate(const Vec& v) const;  ///< t v_i v_{m+j} on the train pattern

  const MatcompObjective* obj_;
  double t_;
  PredictionStore store_;
  Vec residual_;  ///< X - y on the training entries
};

struct CompletionOptions {
  double t = 1.0;
  int steps = 15;
  bool line_search = true;
  bool grad_averaging = false;
  /// Power budget ceil(0.2 k) + 3 at step k (1-based) from the uniform unit
  /// vector, with the shift max(-lambda_prev / 2, ||G u||); otherwise the
  /// accuracy-driven eigensolver with eps' = alpha C_f.
  bool fixed_power_budget = true;
  double power_fraction = 0.2;
  int power_floor = 3;
  /// Start X0 = t u u^T with u uniform (true) or t e1 e1^T (false).
  bool uniform_start = true;
  double rating_range = 4.0;
  std::uint64_t seed = 0;
};

struct StepMetrics {
  int k = 0;
  double f = 0.0;
  double rmse_train = 0.0;
  double rmse_test = 0.0;
  double nmae_test = 0.0;
  std::size_t matvecs = 0;
  long long millis = 0;
};

struct CompletionResult {
  Factorization factors;
  FactoredPSD x;
  std::vector<StepMetrics> steps;  ///< one per iterate, starting at k = 0
  RunTrace trace;
  Vec test_predictions;
  ErrorMetrics train_metrics;
  ErrorMetrics test_metrics;
  std::size_t matvecs = 0;
  long long millis = 0;
};

/// Hazan's algorithm on the lifted squared loss. `data` is used as given
/// (normalize beforehand for the mean-offset preset).
CompletionResult complete(const RatingDataset& data, const CompletionOptions& opt);

}  // namespace fw
