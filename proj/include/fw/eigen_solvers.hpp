#pragma once

#include <functional>
#include <optional>

#include "fw/common.hpp"
#include "fw/rng.hpp"

namespace fw {

/// Symmetric linear operator given by its matvec.
struct SymmetricOperator {
  Index dim = 0;
  std::function<void(const Vec& x, Vec& y)> apply;  ///< y = M x (y pre-sized)
  std::size_t nnz = 0;
  std::optional<Mat> dense;             ///< explicit form, small problems and tests
  std::optional<double> frobenius;      ///< ||M||_F when cheaply known
  std::optional<double> row_sum_bound;  ///< max_i sum_j |M_ij| when rows are enumerable

  static SymmetricOperator from_dense(Mat m);
  /// Materialize by applying to unit vectors (O(n) matvecs).
  Mat to_dense() const;
  Vec operator*(const Vec& x) const;
};

struct EigResult {
  Vec v;                  ///< unit vector
  double rayleigh = 0.0;  ///< v^T M v of the original (unshifted) operator
  int iterations = 0;
  std::size_t matvecs = 0;  ///< including the final Rayleigh-quotient product
};

struct EigOptions {
  enum class Start { random, uniform, given };
  enum class Method { power, lanczos };

  double c = 8.0;                 ///< iterations = ceil(c ln(n) / gamma), gamma = eps / L
  std::optional<int> iterations;  ///< overrides the formula
  std::optional<double> shift;    ///< overrides the default PSD shift L/2
  /// Raise the shift to at least ||M u0||, reusing that product as the first
  /// iteration. Keeps the shifted operator from locking onto the negative end
  /// of a symmetric spectrum when the caller's shift is a rough guess.
  bool shift_at_least_start_norm = false;
  Start start = Start::random;
  Vec start_vector;  ///< for Start::given
  Method method = Method::power;
};

/// Power-method iteration count ceil(c ln(n) / (eps / L)), at least 1.
int power_iteration_count(Index n, double eps, double range_bound, double c = 8.0);

/// v with v^T M v >= lambda_max(M) - eps with high probability, given
/// L >= lambda_max(M) - lambda_min(M).
EigResult approx_largest_ev(const SymmetricOperator& m, double eps, double range_bound, CounterRng& rng,
                            const EigOptions& opt = {});

/// v with v^T M v <= lambda_min(M) + eps (largest eigenvector of -M).
EigResult approx_smallest_ev(const SymmetricOperator& m, double eps, double range_bound, CounterRng& rng,
                             const EigOptions& opt = {});

/// 2 min(||M||_F, max row abs sum); each term bounds the spectral norm.
double spectral_range_bound(const SymmetricOperator& m);
double spectral_range_bound(const Mat& m);

struct DenseEig {
  Vec values;   ///< descending
  Mat vectors;  ///< columns match values
  int sweeps = 0;
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix (n <= 500), run
/// until the off-diagonal Frobenius mass is <= 1e-12 (relative to ||M||_F
/// when that is larger than one).
DenseEig dense_eig_oracle(const Mat& m);

}  // namespace fw
