#include "fw/sparse_psd.hpp"

#include <algorithm>

namespace fw {

double SparsePsdAtom::dot(const Mat& g) const { return g(i, i) + g(j, j) + 2.0 * sign * g(i, j); }

Mat SparsePsdAtom::matrix(Index n) const {
  Mat m = Mat::Zero(n, n);
  m(i, i) = 1.0;
  m(j, j) = 1.0;
  m(i, j) = m(j, i) = static_cast<double>(sign);
  return m;
}

std::string SparsePsdAtom::descriptor() const {
  return (sign > 0 ? "P" : "N") + std::to_string(i + 1) + ":" + std::to_string(j + 1);
}

SparsePsdAtom sparsepsd_lmo(const Mat& g, SparsePsdMode mode) {
  require(g.rows() == g.cols(), "sparsepsd_lmo: gradient must be square");
  const Index n = g.rows();
  require(n >= 2, "sparsepsd_lmo: need n >= 2");
  SparsePsdAtom best;
  double best_val = kInf;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const double diag = g(i, i) + g(j, j);
      const double off = g(i, j) + g(j, i);  // 2 G_ij for symmetric G
      if (mode != SparsePsdMode::minus && diag + off < best_val) {
        best_val = diag + off;
        best = {i, j, 1};
      }
      if (mode != SparsePsdMode::plus && diag - off < best_val) {
        best_val = diag - off;
        best = {i, j, -1};
      }
    }
  return best;
}

std::vector<SparsePsdAtom> sparsepsd_atoms(Index n, SparsePsdMode mode) {
  std::vector<SparsePsdAtom> out;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      if (mode != SparsePsdMode::minus) out.push_back({i, j, 1});
      if (mode != SparsePsdMode::plus) out.push_back({i, j, -1});
    }
  return out;
}

double sparsepsd_diameter_sq(Index n, SparsePsdMode mode) {
  if (n < 2) return 0.0;
  if (mode == SparsePsdMode::both || n >= 4) return 8.0;
  return n == 3 ? 6.0 : 0.0;
}

Index count_nonzeros(const Mat& x, double tol) { return (x.array().abs() > tol).count(); }

// ---------------------------------------------------------------------------

SparsePsdModel::SparsePsdModel(const DenseMatrixObjective& f, SparsePsdMode mode, SparsePsdAtom start)
    : f_(&f), mode_(mode), ledger_(start), atom_(start) {
  require(f.n >= 2, "sparsepsd: need n >= 2");
  require(start.i < start.j && start.j < f.n, "sparsepsd: bad start atom");
  require(mode != SparsePsdMode::minus || start.sign < 0, "sparsepsd: start atom not allowed in minus mode");
  require(mode != SparsePsdMode::plus || start.sign > 0, "sparsepsd: start atom not allowed in plus mode");
  x_ = start.matrix(f.n);
}

Direction SparsePsdModel::direction(double) {
  Mat g = f_->grad(x_);
  ++grad_evals_;
  if (!g.allFinite()) throw NumericalError("sparsepsd: gradient is not finite");
  g = 0.5 * (g + g.transpose()).eval();
  atom_ = sparsepsd_lmo(g, mode_);
  const double gap = x_.cwiseProduct(g).sum() - atom_.dot(g);
  return Direction{gap, 0.0, atom_.descriptor()};
}

double SparsePsdModel::line_search(int k) {
  const Mat s = atom_.matrix(f_->n);
  if (f_->exact_line_search) return std::clamp(f_->exact_line_search(x_, s), 0.0, 1.0);
  const Mat d = s - x_;
  return guarded_line_search([&](double a) { return f_->eval(x_ + a * d); },
                             [&](double a) { return f_->grad(x_ + a * d).cwiseProduct(d).sum(); }, k);
}

void SparsePsdModel::step(double alpha) {
  x_ *= 1.0 - alpha;
  x_(atom_.i, atom_.i) += alpha;
  x_(atom_.j, atom_.j) += alpha;
  x_(atom_.i, atom_.j) += alpha * atom_.sign;
  x_(atom_.j, atom_.i) += alpha * atom_.sign;
  ledger_.blend(alpha, atom_, [](const SparsePsdAtom& a, const SparsePsdAtom& b) { return a == b; });
}

SparsePsdResult sparsepsd_run(const DenseMatrixObjective& f, SparsePsdMode mode, const SolverOptions& options) {
  const SparsePsdAtom start{0, 1, mode == SparsePsdMode::minus ? -1 : 1};
  SparsePsdModel model(f, mode, start);
  RunTrace trace = run(model, options);
  return {model.ledger(), model.x(), std::move(trace)};
}

}  // namespace fw
