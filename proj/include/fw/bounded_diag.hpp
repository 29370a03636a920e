#pragma once

#include "fw/frank_wolfe.hpp"
#include "fw/ledger.hpp"
#include "fw/rng.hpp"
#include "fw/spectahedron.hpp"

namespace fw {

/// Membership in t * {X psd, X_ii <= 1}: smallest eigenvalue >= -1e-10 and
/// diagonal <= t (1 + 1e-12).
bool in_bounded_diag(const Mat& x, double t);

struct BoundedDiagLmoOptions {
  int restarts = 5;
  int iterations = 500;
};

struct BoundedDiagAtom {
  Mat y;
  double value = 0.0;      ///< Y . G
  bool converged = true;   ///< false when the best run was still improving at the budget
};

/// Heuristic minimizer of Y . G over t * {Y psd, Y_ii <= 1}: projected
/// gradient on a full-width factor V (Y = V V^T) with rows kept inside the
/// ball of radius sqrt(t), best of several seeded starts and of Y = 0.
BoundedDiagAtom boundeddiag_lmo(const Mat& g, double t, CounterRng& rng, const BoundedDiagLmoOptions& opt = {});

/// Provable bound 2 t^2 n^2 on the squared Frobenius diameter of t * box
/// (||X||_F <= tr X <= t n and X . Y >= 0 for psd X, Y).
double boundeddiag_diameter_sq(Index n, double t);

class BoundedDiagModel {
 public:
  struct Snapshot {
    IterateLedger<Mat> ledger;
    Mat x;
  };

  BoundedDiagModel(const DenseMatrixObjective& f, double t, std::uint64_t seed,
                   const BoundedDiagLmoOptions& lmo = {});

  double value() const { return f_->eval(x_); }
  Direction direction(double eps_prime);
  double line_search(int k);
  void step(double alpha);
  std::size_t matvecs() const { return grad_evals_; }
  Snapshot snapshot() const { return {ledger_, x_}; }
  void restore(const Snapshot& s) {
    ledger_ = s.ledger;
    x_ = s.x;
  }

  const Mat& x() const { return x_; }
  const IterateLedger<Mat>& ledger() const { return ledger_; }
  /// True while every LMO answer so far reported convergence.
  bool lmo_converged() const { return lmo_converged_; }

 private:
  const DenseMatrixObjective* f_;
  double t_;
  CounterRng rng_;
  BoundedDiagLmoOptions lmo_;
  IterateLedger<Mat> ledger_;
  Mat x_;
  Mat atom_;
  std::size_t grad_evals_ = 0;
  bool lmo_converged_ = true;
};

struct MaxDiagResult {
  IterateLedger<Mat> ledger;
  Mat x;
  RunTrace trace;
  bool lmo_converged = true;
  /// Gaps rely on a heuristic inner solver above n = 3.
  bool oracle_conditional = false;
};

/// Frank-Wolfe over t * box, starting at X = 0.
MaxDiagResult maxdiag_run(const DenseMatrixObjective& f, double t, const SolverOptions& options,
                          std::uint64_t seed = 0, const BoundedDiagLmoOptions& lmo = {});

}  // namespace fw
