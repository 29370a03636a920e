#pragma once

#include <functional>
#include <optional>

#include "fw/frank_wolfe.hpp"
#include "fw/ledger.hpp"
#include "fw/rng.hpp"
#include "fw/vector_domains.hpp"

namespace fw {

/// f and its gradient over R^n, plus optional metadata used by the solver.
struct VectorObjective {
  std::function<double(const Vec&)> eval;
  std::function<Vec(const Vec&)> grad;
  std::optional<double> curvature_bound;  ///< C_f on the domain it will be used with
  std::optional<std::size_t> nnz_hint;
  /// Optional exact argmin over alpha in [0,1] of f(x + alpha (s - x)).
  std::function<double(const Vec& x, const Vec& s)> exact_line_search;
};

// Built-in objectives.
VectorObjective squared_norm_objective();                       ///< ||x||^2
VectorObjective shifted_squared_norm_objective(Vec r);          ///< ||x - r||^2
VectorObjective linear_objective(Vec c);                        ///< c^T x
VectorObjective least_squares_objective(Mat a, Vec b);          ///< ||A x - b||^2
VectorObjective quadratic_objective(Mat q, Vec c);              ///< 1/2 x^T Q x + c^T x, Q sym PSD

/// Largest eigenvalue of the (constant) Hessian of a quadratic objective.
double hessian_lambda_max(const Mat& hessian);

/// Sampler for the randomized linear oracle: returns a candidate atom that
/// equals an exact minimizer with probability at least `success_prob`.
struct RandomizedLmo {
  std::function<VectorAtom(CounterRng&)> sampler;
  double success_prob = 1.0;
};

/// Uniform vertex sampling on the simplex (success probability 1/n).
RandomizedLmo uniform_vertex_sampler(const SimplexDomain& domain);

VectorAtom randomized_lmo(const RandomizedLmo& lmo, CounterRng& rng);

/// <x, grad> - <s*, grad> with s* the domain's exact linear minimizer.
double duality_gap(const Vec& x, const Vec& grad, const VectorDomain& domain);

/// Best alpha in [0,1] along x + alpha (s - x): closed form when the objective
/// provides one, otherwise derivative bisection guarded by {0, 2/(k+2), 1}.
double line_search_alpha(const VectorObjective& objective, const Vec& x, const Vec& s, int k = 0);

/// Frank-Wolfe model over a vector domain; iterate kept both as a ledger of
/// atoms and as a cached dense point.
class VectorModel {
 public:
  struct Snapshot {
    IterateLedger<VectorAtom> ledger;
    Vec x;
  };

  VectorModel(const VectorObjective& objective, const VectorDomain& domain, const VectorAtom& start);

  /// Replace the exact LMO by a sampled one (only valid with line search).
  void use_randomized(RandomizedLmo lmo, CounterRng rng);

  double value() const;
  Direction direction(double eps_prime);
  double line_search(int k);
  void step(double alpha);
  std::size_t matvecs() const { return grad_evals_; }

  Snapshot snapshot() const { return {ledger_, x_}; }
  void restore(const Snapshot& s);

  const Vec& x() const { return x_; }
  const IterateLedger<VectorAtom>& ledger() const { return ledger_; }
  /// sum_j w_j atom_j recomputed from the ledger.
  Vec recompute_point() const;
  const VectorAtom& last_atom() const { return atom_; }

 private:
  const VectorObjective* objective_;
  const VectorDomain* domain_;
  IterateLedger<VectorAtom> ledger_;
  Vec x_;
  Vec grad_;
  VectorAtom atom_;
  std::optional<RandomizedLmo> random_;
  CounterRng rng_;
  std::size_t grad_evals_ = 0;
};

struct VectorRunResult {
  Vec x;
  IterateLedger<VectorAtom> ledger;
  RunTrace trace;
};

/// Frank-Wolfe on a vector domain from a start atom.
VectorRunResult fw_run(const VectorObjective& objective, const VectorDomain& domain,
                       const VectorAtom& start, const SolverOptions& options);

/// Same with the randomized oracle (schedule must be line search).
VectorRunResult fw_run_randomized(const VectorObjective& objective, const VectorDomain& domain,
                                  const VectorAtom& start, const SolverOptions& options,
                                  const RandomizedLmo& lmo, std::uint64_t seed);

struct VectorCertifiedResult {
  Vec x;
  IterateLedger<VectorAtom> ledger;
  double certified_gap = kInf;
  bool certified = false;
  int best_k = 0;
  RunTrace trace;
};

/// Primal-dual certified run; needs objective.curvature_bound.
VectorCertifiedResult gap_certified_run(const VectorObjective& objective, const VectorDomain& domain,
                                        const VectorAtom& start, double eps);

/// Vertex at index 0 (simplex e_1, cube all-ones) or the origin for the l1 ball.
VectorAtom default_start(const VectorDomain& domain);

// Sparse lower-bound constructions for f(x) = ||x||^2 on the simplex.
/// k coordinates equal to 1/k.
Vec uniform_k_vector(Index n, Index k);
/// Random point of the simplex supported on at most k coordinates.
Vec random_sparse_simplex_point(Index n, Index k, CounterRng& rng);

}  // namespace fw
