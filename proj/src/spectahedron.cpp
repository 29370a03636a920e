#include "fw/spectahedron.hpp"

#include <algorithm>
#include <cmath>

#include "fw/ledger.hpp"

namespace fw {

FactoredPSD::FactoredPSD(Vec v, double t) : n_(v.size()), t_(t) {
  require(n_ >= 1, "FactoredPSD: empty start vector");
  require(t > 0.0, "FactoredPSD: scale must be positive");
  const double nrm = v.norm();
  require(nrm > 0.0, "FactoredPSD: start vector is zero");
  weights_.push_back(1.0);
  vectors_.push_back(v / nrm);
}

void FactoredPSD::blend(double alpha, const Vec& v) {
  require(alpha >= 0.0 && alpha <= 1.0, "FactoredPSD::blend: alpha outside [0,1]");
  require(v.size() == n_, "FactoredPSD::blend: dimension mismatch");
  for (double& w : weights_) w *= 1.0 - alpha;
  if (alpha > 0.0) {
    weights_.push_back(alpha);
    vectors_.push_back(v / v.norm());
  }
  std::size_t out = 0;
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    if (weights_[j] < kPruneWeight) continue;
    weights_[out] = weights_[j];
    vectors_[out] = std::move(vectors_[j]);
    ++out;
  }
  weights_.resize(out);
  vectors_.resize(out);
  ++k_;
}

Mat FactoredPSD::to_dense() const {
  Mat x = Mat::Zero(n_, n_);
  for (std::size_t j = 0; j < weights_.size(); ++j) x.noalias() += (t_ * weights_[j]) * vectors_[j] * vectors_[j].transpose();
  return x;
}

double FactoredPSD::weight_sum() const {
  double s = 0.0;
  for (double w : weights_) s += w;
  return s;
}

double FactoredPSD::inner(const SymmetricOperator& g) const {
  double s = 0.0;
  Vec y(n_);
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    g.apply(vectors_[j], y);
    s += weights_[j] * vectors_[j].dot(y);
  }
  return t_ * s;
}

Vec FactoredPSD::apply(const Vec& y) const {
  Vec out = Vec::Zero(n_);
  for (std::size_t j = 0; j < weights_.size(); ++j) out += (t_ * weights_[j] * vectors_[j].dot(y)) * vectors_[j];
  return out;
}

// ---------------------------------------------------------------------------

DenseMatrixObjective frobenius_sq_objective(Index n) {
  DenseMatrixObjective f;
  f.n = n;
  f.eval = [](const Mat& x) { return x.squaredNorm(); };
  f.grad = [](const Mat& x) -> Mat { return 2.0 * x; };
  f.hessian_bound = 2.0;
  f.exact_line_search = [](const Mat& x, const Mat& s) {
    const Mat d = s - x;
    const double dd = d.squaredNorm();
    return dd == 0.0 ? 0.0 : std::clamp(-(x.cwiseProduct(d)).sum() / dd, 0.0, 1.0);
  };
  return f;
}

DenseMatrixObjective frobenius_dist_objective(Mat target) {
  require(target.rows() == target.cols(), "frobenius_dist_objective: target must be square");
  DenseMatrixObjective f;
  f.n = target.rows();
  f.eval = [target](const Mat& x) { return (x - target).squaredNorm(); };
  f.grad = [target](const Mat& x) -> Mat { return 2.0 * (x - target); };
  f.hessian_bound = 2.0;
  f.exact_line_search = [target](const Mat& x, const Mat& s) {
    const Mat d = s - x;
    const double dd = d.squaredNorm();
    return dd == 0.0 ? 0.0 : std::clamp(-((x - target).cwiseProduct(d)).sum() / dd, 0.0, 1.0);
  };
  return f;
}

DenseMatrixObjective matrix_linear_objective(Mat a) {
  require(a.rows() == a.cols(), "matrix_linear_objective: matrix must be square");
  DenseMatrixObjective f;
  f.n = a.rows();
  const Mat sym = 0.5 * (a + a.transpose());
  f.eval = [sym](const Mat& x) { return sym.cwiseProduct(x).sum(); };
  f.grad = [sym](const Mat&) { return sym; };
  f.hessian_bound = 0.0;
  f.exact_line_search = [sym](const Mat& x, const Mat& s) {
    return sym.cwiseProduct(s - x).sum() < 0.0 ? 1.0 : 0.0;
  };
  return f;
}

namespace {

class DenseSpectralState final : public SpectralState {
 public:
  DenseSpectralState(const DenseMatrixObjective& f, Mat x, double t) : f_(&f), x_(std::move(x)), t_(t) { refresh(); }

  double value() const override { return value_; }
  SymmetricOperator gradient() const override { return SymmetricOperator::from_dense(grad_); }
  std::optional<double> iterate_inner() const override { return x_.cwiseProduct(grad_).sum(); }

  void commit(double alpha, const Vec& v) override {
    x_ = blended(alpha, v);
    refresh();
  }

  double value_along(double alpha, const Vec& v) const override { return f_->eval(blended(alpha, v)); }

  double slope_along(double alpha, const Vec& v) const override {
    const Mat d = t_ * v * v.transpose() - x_;
    return f_->grad(blended(alpha, v)).cwiseProduct(d).sum();
  }

  std::optional<double> exact_line_search(const Vec& v) const override {
    if (!f_->exact_line_search) return std::nullopt;
    return f_->exact_line_search(x_, t_ * v * v.transpose());
  }

  void apply_blended_gradient(double beta, const Vec& v, const Vec& x, Vec& y) const override {
    y = f_->grad(blended(beta, v)) * x;
  }

  std::unique_ptr<SpectralState> clone() const override { return std::make_unique<DenseSpectralState>(*this); }

 private:
  Mat blended(double alpha, const Vec& v) const { return (1.0 - alpha) * x_ + (alpha * t_) * v * v.transpose(); }

  void refresh() {
    value_ = f_->eval(x_);
    grad_ = f_->grad(x_);
    grad_ = 0.5 * (grad_ + grad_.transpose()).eval();
  }

  const DenseMatrixObjective* f_;
  Mat x_;
  double t_;
  double value_ = 0.0;
  Mat grad_;
};

}  // namespace

std::unique_ptr<SpectralState> DenseSpectralObjective::make_state(const FactoredPSD& x0) const {
  require(x0.dim() == f_.n, "DenseSpectralObjective: dimension mismatch");
  return std::make_unique<DenseSpectralState>(f_, x0.to_dense(), x0.scale());
}

std::optional<double> DenseSpectralObjective::curvature_bound(double t) const {
  if (!f_.hessian_bound) return std::nullopt;
  return curvature_from_hessian(*f_.hessian_bound, 2.0 * t * t);
}

// ---------------------------------------------------------------------------

SpectAtom spect_lmo(const SymmetricOperator& g, double eps, double t, CounterRng& rng, const EigOptions& opt) {
  require(eps >= 0.0, "spect_lmo: eps must be nonnegative");
  require(t > 0.0, "spect_lmo: t must be positive");
  SpectAtom out;
  if (eps == 0.0) {
    const DenseEig eig = dense_eig_oracle(g.to_dense());
    out.v = eig.vectors.col(g.dim - 1);
    out.value = t * eig.values[g.dim - 1];
    return out;
  }
  const EigResult r = approx_smallest_ev(g, eps / t, spectral_range_bound(g), rng, opt);
  out.v = r.v;
  out.value = t * r.rayleigh;
  out.tolerance = eps;
  out.matvecs = r.matvecs;
  return out;
}

GapEstimate spect_gap(const FactoredPSD& x, const SymmetricOperator& g, double eps2, CounterRng& rng) {
  const SpectAtom s = spect_lmo(g, eps2, x.scale(), rng);
  return {x.inner(g) - s.value, s.tolerance};
}

// ---------------------------------------------------------------------------

HazanModel::HazanModel(const SpectralObjective& objective, const HazanOptions& opt)
    : opt_(opt), rng_(opt.seed) {
  require(opt.t > 0.0, "hazan: t must be positive");
  const Index n = objective.dim();
  Vec start = opt.start.size() ? opt.start : Vec::Unit(n, 0);
  require(start.size() == n, "hazan: start vector has wrong size");
  x_ = FactoredPSD(start, opt.t);
  state_ = objective.make_state(x_);
  v_ = x_.vectors().front();
}

Direction HazanModel::direction(double eps_prime) {
  const SymmetricOperator g = state_->gradient();
  EigOptions eo = opt_.eig;
  if (opt_.eig_policy) opt_.eig_policy(k_, prev_rayleigh_, eo);
  const bool fixed_budget = eo.iterations.has_value();
  const bool averaging = opt_.variant == HazanOptions::Variant::grad_averaging;
  const double t = opt_.t;

  double rayleigh = 0.0;
  double tolerance = eps_prime;
  if (eps_prime == 0.0 && !fixed_budget && !averaging) {
    const DenseEig eig = dense_eig_oracle(g.to_dense());
    v_ = eig.vectors.col(g.dim - 1);
    rayleigh = eig.values[g.dim - 1];
  } else {
    const double acc = eps_prime > 0.0 ? eps_prime / t : 1e-6;
    SymmetricOperator op = g;
    std::size_t per_apply = 1;
    if (averaging) {
      // the blend point follows the current power iterate, so this operator is
      // not linear; it only steers the eigenvector search
      const double beta = 1.0 / std::max(k_, 1);
      const SpectralState* st = state_.get();
      op.apply = [g, st, beta](const Vec& x, Vec& y) {
        Vec y2(x.size());
        g.apply(x, y);
        st->apply_blended_gradient(beta, x / x.norm(), x, y2);
        y = 0.5 * (y + y2);
      };
      per_apply = 2;
      // no accuracy to certify here: without a budget, aim for 1% of the range
      if (!fixed_budget) eo.iterations = power_iteration_count(g.dim, 0.01, 1.0);
    }
    const EigResult r = approx_smallest_ev(op, acc, spectral_range_bound(g), rng_, eo);
    matvecs_ += per_apply * r.matvecs;
    v_ = r.v;
    rayleigh = r.rayleigh;
    if (averaging) {
      rayleigh = v_.dot(g * v_);
      ++matvecs_;
    }
    if (fixed_budget || averaging) tolerance = kInf;
  }
  prev_rayleigh_ = rayleigh;

  double inner = 0.0;
  if (auto fast = state_->iterate_inner()) {
    inner = *fast;
  } else {
    inner = x_.inner(g);
    matvecs_ += x_.size();
  }
  return Direction{inner - t * rayleigh, tolerance, "ev" + format_double(rayleigh)};
}

double HazanModel::line_search(int k) {
  if (auto a = state_->exact_line_search(v_)) return std::clamp(*a, 0.0, 1.0);
  const SpectralState* st = state_.get();
  const Vec v = v_;
  return guarded_line_search([st, v](double a) { return st->value_along(a, v); },
                             [st, v](double a) { return st->slope_along(a, v); }, k);
}

void HazanModel::step(double alpha) {
  state_->commit(alpha, v_);
  x_.blend(alpha, v_);
  ++k_;
  if (opt_.on_step) opt_.on_step(k_, *this);
}

void HazanModel::restore(const Snapshot& s) {
  x_ = s.x;
  state_ = s.state->clone();
  k_ = x_.iterations();
}

HazanResult hazan_run(const SpectralObjective& objective, const HazanOptions& opt) {
  HazanOptions o = opt;
  if (o.variant != HazanOptions::Variant::plain) o.solver.schedule = StepSchedule::line_search();
  if (o.solver.lmo == LmoMode::approx && !o.solver.curvature) o.solver.curvature = objective.curvature_bound(o.t);
  HazanModel model(objective, o);
  HazanResult out;
  out.trace = run(model, o.solver);
  out.trace.seed = o.seed;
  out.x = model.iterate();
  out.certified_gap = out.trace.best_certified_gap();
  out.certified = o.solver.stop.gap_tolerance && out.certified_gap <= *o.solver.stop.gap_tolerance;
  return out;
}

HazanResult hazan_certified_run(const SpectralObjective& objective, double t, double eps, std::uint64_t seed,
                                double curvature) {
  double c = curvature;
  if (c < 0.0) {
    const auto cb = objective.curvature_bound(t);
    require(cb.has_value(), "hazan_certified_run: curvature bound required");
    c = *cb;
  }
  HazanOptions o;
  o.t = t;
  o.seed = seed;
  HazanModel model(objective, o);
  auto res = certified_run(model, eps, c, LmoMode::approx);
  HazanResult out;
  out.x = res.best.x;
  out.trace = std::move(res.trace);
  out.trace.seed = seed;
  out.certified_gap = res.certified_gap;
  out.certified = res.certified;
  return out;
}

Mat uniform_rank_k(Index n, Index k) {
  require(k >= 1 && k <= n, "uniform_rank_k: need 1 <= k <= n");
  Mat x = Mat::Zero(n, n);
  for (Index i = 0; i < k; ++i) x(i, i) = 1.0 / static_cast<double>(k);
  return x;
}

FactoredPSD random_lowrank_spectahedron(Index n, Index k, CounterRng& rng) {
  require(k >= 1 && k <= n, "random_lowrank_spectahedron: need 1 <= k <= n");
  FactoredPSD x(rng.unit_vector(n), 1.0);
  // successive blends with random weights give an arbitrary convex combination
  for (Index j = 1; j < k; ++j) x.blend(rng.uniform(), rng.unit_vector(n));
  return x;
}

}  // namespace fw
