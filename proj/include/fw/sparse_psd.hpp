#pragma once

#include <string>
#include <vector>

#include "fw/frank_wolfe.hpp"
#include "fw/ledger.hpp"
#include "fw/spectahedron.hpp"

namespace fw {

/// P(ij) = (e_i + e_j)(e_i + e_j)^T or N(ij) = (e_i - e_j)(e_i - e_j)^T, i < j.
struct SparsePsdAtom {
  Index i = 0;
  Index j = 1;
  int sign = 1;  ///< +1 for P, -1 for N

  /// <atom, G> = G_ii + G_jj + 2 sign G_ij (G symmetric).
  double dot(const Mat& g) const;
  Mat matrix(Index n) const;
  /// "P1:2" / "N3:7" with 1-based indices.
  std::string descriptor() const;

  friend bool operator==(const SparsePsdAtom&, const SparsePsdAtom&) = default;
};

enum class SparsePsdMode { both, plus, minus };

/// Lowest (i, j, P-before-N) minimizer of <atom, G>.
SparsePsdAtom sparsepsd_lmo(const Mat& g, SparsePsdMode mode = SparsePsdMode::both);

/// Every atom of the hull for brute-force checks.
std::vector<SparsePsdAtom> sparsepsd_atoms(Index n, SparsePsdMode mode = SparsePsdMode::both);

/// Squared Frobenius diameter of the atom hull (8 once n >= 4 or N atoms are allowed).
double sparsepsd_diameter_sq(Index n, SparsePsdMode mode);

class SparsePsdModel {
 public:
  struct Snapshot {
    IterateLedger<SparsePsdAtom> ledger;
    Mat x;
  };

  SparsePsdModel(const DenseMatrixObjective& f, SparsePsdMode mode, SparsePsdAtom start = {});

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
  const IterateLedger<SparsePsdAtom>& ledger() const { return ledger_; }

 private:
  const DenseMatrixObjective* f_;
  SparsePsdMode mode_;
  IterateLedger<SparsePsdAtom> ledger_;
  Mat x_;
  SparsePsdAtom atom_;
  std::size_t grad_evals_ = 0;
};

struct SparsePsdResult {
  IterateLedger<SparsePsdAtom> ledger;
  Mat x;
  RunTrace trace;
};

SparsePsdResult sparsepsd_run(const DenseMatrixObjective& f, SparsePsdMode mode, const SolverOptions& options);

/// Number of entries with |x_ij| > tol.
Index count_nonzeros(const Mat& x, double tol = 0.0);

}  // namespace fw
