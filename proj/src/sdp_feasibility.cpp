#include "fw/sdp_feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fw {

SparseSymMatrix SparseSymMatrix::from_dense(const Mat& a, double drop) {
  require(a.rows() == a.cols(), "SparseSymMatrix: matrix must be square");
  SparseSymMatrix out(a.rows());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i <= j; ++i) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      if (std::abs(v) > drop) out.add(i, j, v);
    }
  return out;
}

void SparseSymMatrix::add(Index i, Index j, double v) {
  require(i >= 0 && i < n_ && j >= 0 && j < n_, "SparseSymMatrix: index out of range");
  row_.push_back(i);
  col_.push_back(j);
  val_.push_back(v);
  if (i != j) {
    row_.push_back(j);
    col_.push_back(i);
    val_.push_back(v);
  }
}

void SparseSymMatrix::apply(const Vec& x, Vec& y, double scale) const {
  for (std::size_t e = 0; e < val_.size(); ++e) y[row_[e]] += scale * val_[e] * x[col_[e]];
}

double SparseSymMatrix::quad(const Vec& v) const {
  double s = 0.0;
  for (std::size_t e = 0; e < val_.size(); ++e) s += val_[e] * v[row_[e]] * v[col_[e]];
  return s;
}

Mat SparseSymMatrix::to_dense() const {
  Mat a = Mat::Zero(n_, n_);
  for (std::size_t e = 0; e < val_.size(); ++e) a(row_[e], col_[e]) += val_[e];
  return a;
}

double SparseSymMatrix::frobenius() const { return to_dense().norm(); }

// ---------------------------------------------------------------------------

void FeasibilitySDP::validate() const {
  require(n >= 1, "sdp: dimension must be positive");
  require(t > 0.0, "sdp: trace bound must be positive");
  require(!a.empty(), "sdp: no constraints");
  if (objective) require(objective->dim() == n, "sdp: objective has the wrong dimension");
  require(static_cast<std::size_t>(b.size()) == a.size(), "sdp: need one b per constraint");
  for (const auto& ai : a) require(ai.dim() == n, "sdp: constraint has the wrong dimension");
}

Vec FeasibilitySDP::constraint_values(const FactoredPSD& x) const {
  Vec out = Vec::Zero(static_cast<Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < x.size(); ++k)
      out[static_cast<Index>(i)] += x.scale() * x.weights()[k] * a[i].quad(x.vectors()[k]);
  return out;
}

double FeasibilitySDP::max_violation(const FactoredPSD& x) const { return (constraint_values(x) - b).maxCoeff(); }

FeasibilitySDP parse_feasibility_sdp(std::istream& in, const std::string& name) {
  FeasibilitySDP sdp;
  std::vector<double> b;
  bool have_n = false;
  bool in_objective = false;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) { return DataError(name + ":" + std::to_string(lineno) + ": " + what); };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string head;
    if (!(ls >> head)) continue;
    std::string rest;
    if (head == "n") {
      if (have_n) throw fail("dimension given twice");
      if (!(ls >> sdp.n) || sdp.n < 1) throw fail("bad dimension");
      have_n = true;
    } else if (head == "t") {
      if (!(ls >> sdp.t) || !(sdp.t > 0.0)) throw fail("bad trace bound");
    } else if (head == "constraint") {
      if (!have_n) throw fail("constraint before dimension");
      double bi = 0.0;
      if (!(ls >> bi)) throw fail("constraint needs a right-hand side");
      sdp.a.emplace_back(sdp.n);
      b.push_back(bi);
      in_objective = false;
    } else if (head == "objective") {
      if (!have_n) throw fail("objective before dimension");
      if (sdp.objective) throw fail("objective given twice");
      sdp.objective.emplace(sdp.n);
      in_objective = true;
    } else {
      if (sdp.a.empty() && !in_objective) throw fail("entry outside a constraint block");
      std::istringstream es(line);
      long long i = 0, j = 0;
      double v = 0.0;
      if (!(es >> i >> j >> v)) throw fail("expected 'i j value'");
      if (i < 0 || j < 0 || i >= sdp.n || j >= sdp.n) throw fail("entry index out of range");
      if (es >> rest) throw fail("trailing text '" + rest + "'");
      (in_objective ? *sdp.objective : sdp.a.back()).add(i, j, v);
      continue;
    }
    if (ls >> rest) throw fail("trailing text '" + rest + "'");
  }
  if (!have_n) throw DataError(name + ": missing dimension line");
  if (sdp.a.empty() && !sdp.objective) throw DataError(name + ": no constraints");
  sdp.b = Eigen::Map<const Vec>(b.data(), static_cast<Index>(b.size()));
  return sdp;
}

FeasibilitySDP load_feasibility_sdp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open problem file: " + path);
  return parse_feasibility_sdp(in, path);
}

namespace {

void write_entries(std::ostream& out, const SparseSymMatrix& m) {
  const Mat a = m.to_dense();
  for (Index c = 0; c < a.cols(); ++c)
    for (Index r = 0; r <= c; ++r)
      if (a(r, c) != 0.0) out << r << " " << c << " " << format_double(a(r, c)) << "\n";
}

}  // namespace

void write_feasibility_sdp(std::ostream& out, const FeasibilitySDP& sdp) {
  out << "n " << sdp.n << "\nt " << format_double(sdp.t) << "\n";
  for (std::size_t i = 0; i < sdp.a.size(); ++i) {
    out << "constraint " << format_double(sdp.b[static_cast<Index>(i)]) << "\n";
    write_entries(out, sdp.a[i]);
  }
  if (sdp.objective) {
    out << "objective\n";
    write_entries(out, *sdp.objective);
  }
}

// ---------------------------------------------------------------------------

SoftMaxValue softmax_eval(const Vec& a, const Vec& b, double sigma) {
  require(sigma > 0.0, "softmax: sigma must be positive");
  require(a.size() == b.size() && a.size() > 0, "softmax: size mismatch");
  const Vec z = sigma * (a - b);
  const double top = z.maxCoeff();
  SoftMaxValue out;
  out.weights = (z.array() - top).exp().matrix();
  const double sum = out.weights.sum();
  out.weights /= sum;
  out.f = (top + std::log(sum)) / sigma;
  return out;
}

double softmax_sigma(std::size_t m, double eps) {
  require(eps > 0.0, "softmax: eps must be positive");
  return m > 1 ? std::log(static_cast<double>(m)) / eps : 1.0 / eps;
}

namespace {

double spectral_norm_estimate(const SparseSymMatrix& a, std::uint64_t seed) {
  SymmetricOperator op;
  op.dim = a.dim();
  op.nnz = a.nnz();
  op.apply = [&a](const Vec& x, Vec& y) {
    y.setZero();
    a.apply(x, y);
  };
  op.frobenius = a.frobenius();
  if (*op.frobenius == 0.0) return 0.0;
  CounterRng rng(seed);
  EigOptions eo;
  eo.method = EigOptions::Method::lanczos;
  const double tol = 1e-6;
  const double range = spectral_range_bound(op);
  const double hi = approx_largest_ev(op, tol, range, rng, eo).rayleigh;
  const double lo = approx_smallest_ev(op, tol, range, rng, eo).rayleigh;
  return std::max(std::abs(hi), std::abs(lo)) + tol;
}

class SoftMaxState final : public SpectralState {
 public:
  SoftMaxState(const SoftMaxObjective& obj, const FactoredPSD& x0)
      : obj_(&obj), a_(obj.sdp().constraint_values(x0)), t_(x0.scale()) {}

  double value() const override { return softmax_eval(a_, obj_->sdp().b, obj_->sigma()).f; }

  SymmetricOperator gradient() const override { return operator_for(a_); }

  std::optional<double> iterate_inner() const override {
    return softmax_eval(a_, obj_->sdp().b, obj_->sigma()).weights.dot(a_);
  }

  void commit(double alpha, const Vec& v) override { a_ = blended(alpha, v); }

  double value_along(double alpha, const Vec& v) const override {
    return softmax_eval(blended(alpha, v), obj_->sdp().b, obj_->sigma()).f;
  }

  double slope_along(double alpha, const Vec& v) const override {
    const Vec c = candidate(v);
    const Vec a = (1.0 - alpha) * a_ + alpha * c;
    return softmax_eval(a, obj_->sdp().b, obj_->sigma()).weights.dot(c - a_);
  }

  void apply_blended_gradient(double beta, const Vec& v, const Vec& x, Vec& y) const override {
    operator_for(blended(beta, v)).apply(x, y);
  }

  std::unique_ptr<SpectralState> clone() const override { return std::make_unique<SoftMaxState>(*this); }

 private:
  Vec candidate(const Vec& v) const {
    const auto& sdp = obj_->sdp();
    Vec c(static_cast<Index>(sdp.m()));
    for (std::size_t i = 0; i < sdp.m(); ++i) c[static_cast<Index>(i)] = t_ * sdp.a[i].quad(v);
    return c;
  }

  Vec blended(double alpha, const Vec& v) const { return (1.0 - alpha) * a_ + alpha * candidate(v); }

  SymmetricOperator operator_for(const Vec& a) const {
    const FeasibilitySDP* sdp = &obj_->sdp();
    const Vec w = softmax_eval(a, sdp->b, obj_->sigma()).weights;
    SymmetricOperator op;
    op.dim = sdp->n;
    double frob = 0.0;
    for (std::size_t i = 0; i < sdp->m(); ++i) {
      op.nnz += sdp->a[i].nnz();
      frob += w[static_cast<Index>(i)] * sdp->a[i].frobenius();
    }
    // triangle inequality: only an upper bound, which is all the range needs
    op.frobenius = frob;
    op.apply = [sdp, w](const Vec& x, Vec& y) {
      y.setZero();
      for (std::size_t i = 0; i < sdp->m(); ++i) sdp->a[i].apply(x, y, w[static_cast<Index>(i)]);
    };
    return op;
  }

  const SoftMaxObjective* obj_;
  Vec a_;  ///< A_i . X
  double t_;
};

}  // namespace

SoftMaxObjective::SoftMaxObjective(const FeasibilitySDP& sdp, double sigma) : sdp_(&sdp), sigma_(sigma) {
  sdp.validate();
  require(sigma > 0.0, "softmax: sigma must be positive");
  for (std::size_t i = 0; i < sdp.m(); ++i) max_norm_ = std::max(max_norm_, spectral_norm_estimate(sdp.a[i], i));
}

std::unique_ptr<SpectralState> SoftMaxObjective::make_state(const FactoredPSD& x0) const {
  require(x0.dim() == sdp_->n, "softmax: dimension mismatch");
  return std::make_unique<SoftMaxState>(*this, x0);
}

std::optional<double> SoftMaxObjective::curvature_bound(double t) const { return sigma_ * t * t * max_norm_ * max_norm_; }

std::string to_string(FeasStatus s) {
  switch (s) {
    case FeasStatus::feasible: return "feasible";
    case FeasStatus::infeasible: return "infeasible";
    case FeasStatus::undetermined: return "undetermined";
  }
  return "undetermined";
}

FeasResult solve_eps_feasible(const FeasibilitySDP& sdp, double eps, const FeasOptions& opt) {
  require(eps > 0.0, "solve_eps_feasible: eps must be positive");
  sdp.validate();
  FeasResult out;
  out.sigma = softmax_sigma(sdp.m(), eps);
  const SoftMaxObjective obj(sdp, out.sigma);
  out.curvature = *obj.curvature_bound(sdp.t);
  const double logm = std::max(1.0, std::log(static_cast<double>(sdp.m())));
  out.budget = opt.max_iters ? *opt.max_iters
                             : static_cast<int>(std::ceil(opt.budget_factor * logm / (eps * eps)));
  const double slack = sdp.m() > 1 ? std::log(static_cast<double>(sdp.m())) / out.sigma : 0.0;
  const double eps_prime = sdp.n <= opt.dense_lmo_limit ? 0.0 : 0.25 * eps;

  HazanOptions ho;
  ho.t = sdp.t;
  ho.seed = opt.seed;
  ho.variant = HazanOptions::Variant::line_search;
  HazanModel model(obj, ho);
  const auto t0 = std::chrono::steady_clock::now();

  for (int k = 0;; ++k) {
    const double f = model.value();
    require_finite(f, "soft-max value");
    if (f <= eps) {
      out.status = FeasStatus::feasible;
      out.trace.rows.push_back({k, f, std::nan(""), kInf, 0.0, "", model.matvecs(), detail::elapsed_ms(t0)});
      break;
    }
    if (k >= out.budget) {
      out.trace.rows.push_back({k, f, std::nan(""), kInf, 0.0, "", model.matvecs(), detail::elapsed_ms(t0)});
      break;
    }
    Direction dir = model.direction(eps_prime);
    ++out.eigen_calls;
    TraceRow row{k, f, dir.gap, dir.tolerance, 0.0, std::move(dir.atom), model.matvecs(), detail::elapsed_ms(t0)};
    detail::check_row(row);
    out.lower_bound = std::max(out.lower_bound, f - row.gap - row.tolerance);
    if (out.lower_bound > eps) {
      out.status = FeasStatus::infeasible;
      out.trace.rows.push_back(std::move(row));
      break;
    }
    row.alpha = model.line_search(k);
    out.trace.rows.push_back(row);
    model.step(row.alpha);
  }
  out.trace.seed = opt.seed;
  out.x = model.iterate();
  out.f = model.value();
  out.max_violation = sdp.max_violation(out.x);
  out.violation_lower_bound = out.lower_bound - slack;
  return out;
}

BinarySearchResult binary_search_objective(const SparseSymMatrix& c, const FeasibilitySDP& sdp, double eps,
                                           std::optional<std::pair<double, double>> range, int max_rounds,
                                           const FeasOptions& opt) {
  require(c.dim() == sdp.n, "binary_search_objective: objective has the wrong dimension");
  require(sdp.n >= 1 && sdp.t > 0.0, "binary_search_objective: bad problem");
  require(max_rounds >= 1, "binary_search_objective: need at least one round");
  BinarySearchResult out;
  const double radius = 2.0 * c.frobenius() * sdp.t;
  out.lo = range ? range->first : -radius;
  out.hi = range ? range->second : radius;
  require(out.lo <= out.hi, "binary_search_objective: empty range");

  FeasibilitySDP aug = sdp;
  SparseSymMatrix neg(sdp.n);
  {
    const Mat d = c.to_dense();
    for (Index j = 0; j < d.cols(); ++j)
      for (Index i = 0; i <= j; ++i)
        if (d(i, j) != 0.0) neg.add(i, j, -d(i, j));
  }
  aug.a.push_back(neg);
  aug.b.conservativeResize(aug.b.size() + 1);

  while (out.rounds < max_rounds && out.hi - out.lo > eps) {
    const double gamma = 0.5 * (out.lo + out.hi);
    aug.b[aug.b.size() - 1] = -gamma;
    const FeasResult r = solve_eps_feasible(aug, eps, opt);
    ++out.rounds;
    if (r.status == FeasStatus::feasible) {
      out.lo = gamma;
      out.x = r.x;
      out.found = true;
    } else {
      if (r.status == FeasStatus::undetermined) ++out.undetermined;
      out.hi = gamma;
    }
  }
  if (out.found) {
    out.objective = 0.0;
    for (std::size_t k = 0; k < out.x.size(); ++k)
      out.objective += out.x.scale() * out.x.weights()[k] * c.quad(out.x.vectors()[k]);
  }
  return out;
}

}  // namespace fw
