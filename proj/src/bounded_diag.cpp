#include "fw/bounded_diag.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

namespace fw {

bool in_bounded_diag(const Mat& x, double t) {
  if (x.rows() != x.cols()) return false;
  if (x.size() == 0) return true;
  if ((x.diagonal().array() > t * (1.0 + 1e-12)).any()) return false;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (x + x.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -1e-10;
}

double boundeddiag_diameter_sq(Index n, double t) {
  const double nt = static_cast<double>(n) * t;
  return 2.0 * nt * nt;
}

namespace {

void project_rows(Mat& v, double radius) {
  for (Index i = 0; i < v.rows(); ++i) {
    const double r = v.row(i).norm();
    if (r > radius) v.row(i) *= radius / r;
  }
}

struct FactorRun {
  Mat y;
  double value = kInf;
  bool converged = true;
};

FactorRun descend(const Mat& g, double t, CounterRng rng, int iterations, double step) {
  const Index n = g.rows();
  const double radius = std::sqrt(t);
  Mat v(n, n);
  for (Index i = 0; i < n; ++i) v.row(i) = radius * rng.unit_vector(n).transpose();
  double value = (v.transpose() * g * v).trace();
  double prev = value;
  for (int it = 0; it < iterations; ++it) {
    v -= step * (2.0 * g * v);
    project_rows(v, radius);
    prev = value;
    value = (v.transpose() * g * v).trace();
  }
  FactorRun out;
  out.y = v * v.transpose();
  out.value = value;
  out.converged = std::abs(prev - value) <= 1e-9 * std::max(1.0, std::abs(value));
  return out;
}

}  // namespace

BoundedDiagAtom boundeddiag_lmo(const Mat& g_in, double t, CounterRng& rng, const BoundedDiagLmoOptions& opt) {
  require(g_in.rows() == g_in.cols(), "boundeddiag_lmo: gradient must be square");
  require(t > 0.0, "boundeddiag_lmo: t must be positive");
  require(opt.restarts >= 1 && opt.iterations >= 0, "boundeddiag_lmo: bad budget");
  const Index n = g_in.rows();
  const Mat g = 0.5 * (g_in + g_in.transpose());
  BoundedDiagAtom best{Mat::Zero(n, n), 0.0, true};
  const double gnorm = g.norm();
  if (gnorm == 0.0) return best;
  const double step = 1.0 / (2.0 * gnorm);

  const CounterRng base = rng.split(0);
  rng = rng.split(1);
  std::vector<FactorRun> runs(static_cast<std::size_t>(opt.restarts));
#if defined(FW_HAVE_OPENMP)
#pragma omp parallel for schedule(static) if (n >= 64 && opt.restarts > 1)
#endif
  for (int r = 0; r < opt.restarts; ++r)
    runs[static_cast<std::size_t>(r)] = descend(g, t, base.split(static_cast<std::uint64_t>(r)), opt.iterations, step);
  // lowest restart index wins ties, independent of thread scheduling
  for (const auto& run : runs)
    if (run.value < best.value) best = {run.y, run.value, run.converged};
  return best;
}

// ---------------------------------------------------------------------------

BoundedDiagModel::BoundedDiagModel(const DenseMatrixObjective& f, double t, std::uint64_t seed,
                                   const BoundedDiagLmoOptions& lmo)
    : f_(&f), t_(t), rng_(seed), lmo_(lmo), ledger_(Mat::Zero(f.n, f.n)), x_(Mat::Zero(f.n, f.n)) {
  require(t > 0.0, "maxdiag: t must be positive");
}

Direction BoundedDiagModel::direction(double) {
  const Mat g = f_->grad(x_);
  ++grad_evals_;
  if (!g.allFinite()) throw NumericalError("maxdiag: gradient is not finite");
  const BoundedDiagAtom a = boundeddiag_lmo(g, t_, rng_, lmo_);
  lmo_converged_ = lmo_converged_ && a.converged;
  atom_ = a.y;
  const double gap = x_.cwiseProduct(0.5 * (g + g.transpose())).sum() - a.value;
  return Direction{gap, 0.0, "Y" + format_double(a.value)};
}

double BoundedDiagModel::line_search(int k) {
  if (f_->exact_line_search) return std::clamp(f_->exact_line_search(x_, atom_), 0.0, 1.0);
  const Mat d = atom_ - x_;
  return guarded_line_search([&](double a) { return f_->eval(x_ + a * d); },
                             [&](double a) { return f_->grad(x_ + a * d).cwiseProduct(d).sum(); }, k);
}

void BoundedDiagModel::step(double alpha) {
  x_ = (1.0 - alpha) * x_ + alpha * atom_;
  ledger_.blend(alpha, atom_);
}

MaxDiagResult maxdiag_run(const DenseMatrixObjective& f, double t, const SolverOptions& options, std::uint64_t seed,
                          const BoundedDiagLmoOptions& lmo) {
  BoundedDiagModel model(f, t, seed, lmo);
  RunTrace trace = run(model, options);
  trace.seed = seed;
  return {model.ledger(), model.x(), std::move(trace), model.lmo_converged(), f.n > 3};
}

}  // namespace fw
