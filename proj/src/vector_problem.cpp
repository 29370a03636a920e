#include "fw/vector_problem.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace fw {

VectorObjective squared_norm_objective() {
  VectorObjective f;
  f.eval = [](const Vec& x) { return x.squaredNorm(); };
  f.grad = [](const Vec& x) -> Vec { return 2.0 * x; };
  f.exact_line_search = [](const Vec& x, const Vec& s) {
    const Vec d = s - x;
    const double dd = d.squaredNorm();
    if (dd == 0.0) return 0.0;
    return std::clamp(-x.dot(d) / dd, 0.0, 1.0);
  };
  return f;
}

VectorObjective shifted_squared_norm_objective(Vec r) {
  VectorObjective f;
  f.eval = [r](const Vec& x) { return (x - r).squaredNorm(); };
  f.grad = [r](const Vec& x) -> Vec { return 2.0 * (x - r); };
  f.exact_line_search = [r](const Vec& x, const Vec& s) {
    const Vec d = s - x;
    const double dd = d.squaredNorm();
    if (dd == 0.0) return 0.0;
    return std::clamp(-(x - r).dot(d) / dd, 0.0, 1.0);
  };
  return f;
}

VectorObjective linear_objective(Vec c) {
  VectorObjective f;
  f.eval = [c](const Vec& x) { return c.dot(x); };
  f.grad = [c](const Vec&) { return c; };
  f.curvature_bound = 0.0;
  f.exact_line_search = [c](const Vec& x, const Vec& s) { return c.dot(s - x) < 0.0 ? 1.0 : 0.0; };
  return f;
}

VectorObjective least_squares_objective(Mat a, Vec b) {
  require(a.rows() == b.size(), "least_squares_objective: shape mismatch");
  VectorObjective f;
  f.eval = [a, b](const Vec& x) { return (a * x - b).squaredNorm(); };
  f.grad = [a, b](const Vec& x) -> Vec { return 2.0 * a.transpose() * (a * x - b); };
  f.exact_line_search = [a, b](const Vec& x, const Vec& s) {
    const Vec ad = a * (s - x);
    const double dd = ad.squaredNorm();
    if (dd == 0.0) return 0.0;
    return std::clamp(-(a * x - b).dot(ad) / dd, 0.0, 1.0);
  };
  return f;
}

VectorObjective quadratic_objective(Mat q, Vec c) {
  require(q.rows() == q.cols() && q.rows() == c.size(), "quadratic_objective: shape mismatch");
  VectorObjective f;
  f.eval = [q, c](const Vec& x) { return 0.5 * x.dot(q * x) + c.dot(x); };
  f.grad = [q, c](const Vec& x) -> Vec { return q * x + c; };
  f.exact_line_search = [q, c](const Vec& x, const Vec& s) {
    const Vec d = s - x;
    const double curv = d.dot(q * d);
    const double slope = (q * x + c).dot(d);
    if (curv <= 0.0) return slope < 0.0 ? 1.0 : 0.0;
    return std::clamp(-slope / curv, 0.0, 1.0);
  };
  return f;
}

double hessian_lambda_max(const Mat& hessian) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hessian, Eigen::EigenvaluesOnly);
  return std::max(0.0, es.eigenvalues().maxCoeff());
}

// ---------------------------------------------------------------------------

RandomizedLmo uniform_vertex_sampler(const SimplexDomain& domain) {
  const Index n = domain.dim();
  return RandomizedLmo{[n](CounterRng& rng) {
                         return VectorAtom::vertex(static_cast<Index>(rng.uniform_index(static_cast<std::size_t>(n))));
                       },
                       1.0 / static_cast<double>(n)};
}

VectorAtom randomized_lmo(const RandomizedLmo& lmo, CounterRng& rng) { return lmo.sampler(rng); }

double duality_gap(const Vec& x, const Vec& grad, const VectorDomain& domain) {
  return x.dot(grad) - domain.lmo(grad).dot(grad);
}

double line_search_alpha(const VectorObjective& objective, const Vec& x, const Vec& s, int k) {
  const Vec d = s - x;
  if (d.squaredNorm() == 0.0) return 0.0;
  if (objective.exact_line_search) return std::clamp(objective.exact_line_search(x, s), 0.0, 1.0);
  auto phi = [&](double a) { return objective.eval(x + a * d); };
  auto slope = [&](double a) { return objective.grad(x + a * d).dot(d); };
  return guarded_line_search(phi, slope, k);
}

// ---------------------------------------------------------------------------

VectorModel::VectorModel(const VectorObjective& objective, const VectorDomain& domain, const VectorAtom& start)
    : objective_(&objective), domain_(&domain), ledger_(start), x_(start.point(domain.dim())), atom_(start) {
  require(objective.eval && objective.grad, "VectorModel: objective needs eval and grad");
  require(domain.contains(x_), "VectorModel: start is not in the domain");
}

void VectorModel::use_randomized(RandomizedLmo lmo, CounterRng rng) {
  random_ = std::move(lmo);
  rng_ = rng;
}

double VectorModel::value() const { return objective_->eval(x_); }

Direction VectorModel::direction(double) {
  grad_ = objective_->grad(x_);
  ++grad_evals_;
  if (!grad_.allFinite()) throw NumericalError("gradient is not finite");
  const VectorAtom exact = domain_->lmo(grad_);
  const double gap = x_.dot(grad_) - exact.dot(grad_);
  atom_ = random_ ? random_->sampler(rng_) : exact;
  return Direction{gap, 0.0, atom_.descriptor()};
}

double VectorModel::line_search(int k) {
  return line_search_alpha(*objective_, x_, atom_.point(domain_->dim()), k);
}

void VectorModel::step(double alpha) {
  require(alpha >= 0.0 && alpha <= 1.0, "VectorModel::step: alpha outside [0,1]");
  x_ = (1.0 - alpha) * x_ + alpha * atom_.point(domain_->dim());
  ledger_.blend(alpha, atom_, [](const VectorAtom& a, const VectorAtom& b) { return a == b; });
}

void VectorModel::restore(const Snapshot& s) {
  ledger_ = s.ledger;
  x_ = s.x;
}

Vec VectorModel::recompute_point() const {
  Vec p = Vec::Zero(domain_->dim());
  for (const auto& e : ledger_.entries()) p += e.weight * e.atom.point(domain_->dim());
  return p;
}

// ---------------------------------------------------------------------------

VectorRunResult fw_run(const VectorObjective& objective, const VectorDomain& domain, const VectorAtom& start,
                       const SolverOptions& options) {
  VectorModel model(objective, domain, start);
  RunTrace trace = run(model, options);
  return {model.x(), model.ledger(), std::move(trace)};
}

VectorRunResult fw_run_randomized(const VectorObjective& objective, const VectorDomain& domain,
                                  const VectorAtom& start, const SolverOptions& options, const RandomizedLmo& lmo,
                                  std::uint64_t seed) {
  // a sampled atom may be a bad direction; only line search guarantees no increase
  require(options.schedule.searches(), "randomized LMO requires the line-search schedule");
  VectorModel model(objective, domain, start);
  model.use_randomized(lmo, CounterRng(seed));
  RunTrace trace = run(model, options);
  trace.seed = seed;
  return {model.x(), model.ledger(), std::move(trace)};
}

VectorCertifiedResult gap_certified_run(const VectorObjective& objective, const VectorDomain& domain,
                                        const VectorAtom& start, double eps) {
  require(objective.curvature_bound.has_value(), "gap_certified_run: curvature bound required");
  VectorModel model(objective, domain, start);
  auto res = certified_run(model, eps, *objective.curvature_bound, LmoMode::exact);
  return {res.best.x, res.best.ledger, res.certified_gap, res.certified, res.best_k, std::move(res.trace)};
}

VectorAtom default_start(const VectorDomain& domain) {
  if (const auto* ball = dynamic_cast<const L1BallDomain*>(&domain)) return VectorAtom::origin(ball->radius());
  if (dynamic_cast<const CubeDomain*>(&domain))
    return VectorAtom::sign_vector(std::vector<signed char>(static_cast<std::size_t>(domain.dim()), 1));
  return VectorAtom::vertex(0);
}

Vec uniform_k_vector(Index n, Index k) {
  require(k >= 1 && k <= n, "uniform_k_vector: need 1 <= k <= n");
  Vec x = Vec::Zero(n);
  x.head(k).setConstant(1.0 / static_cast<double>(k));
  return x;
}

Vec random_sparse_simplex_point(Index n, Index k, CounterRng& rng) {
  require(k >= 1 && k <= n, "random_sparse_simplex_point: need 1 <= k <= n");
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  // partial Fisher-Yates for the support
  for (Index i = 0; i < k; ++i) {
    const auto j = i + static_cast<Index>(rng.uniform_index(static_cast<std::size_t>(n - i)));
    std::swap(idx[i], idx[j]);
  }
  const Index card = 1 + static_cast<Index>(rng.uniform_index(static_cast<std::size_t>(k)));
  Vec x = Vec::Zero(n);
  double total = 0.0;
  for (Index i = 0; i < card; ++i) {
    // exponential weights give a uniform point on the face
    const double w = -std::log(1.0 - rng.uniform());
    x[idx[i]] = w;
    total += w;
  }
  if (total == 0.0) {
    x[idx[0]] = 1.0;
    return x;
  }
  return x / total;
}

}  // namespace fw
