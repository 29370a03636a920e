#include "fw/eigen_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "fw/kernels.hpp"

namespace fw {

SymmetricOperator SymmetricOperator::from_dense(Mat m) {
  require(m.rows() == m.cols(), "SymmetricOperator::from_dense: matrix must be square");
  SymmetricOperator op;
  op.dim = m.rows();
  op.nnz = static_cast<std::size_t>((m.array() != 0.0).count());
  op.frobenius = m.norm();
  op.row_sum_bound = m.rows() ? m.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
  // captured by value so copies of the operator stay valid
  op.apply = [m](const Vec& x, Vec& y) { kernels::dense_symv(m, kernels::view(x), kernels::view(y)); };
  op.dense = std::move(m);
  return op;
}

Mat SymmetricOperator::to_dense() const {
  if (dense) return *dense;
  Mat out(dim, dim);
  Vec e = Vec::Zero(dim), y(dim);
  for (Index j = 0; j < dim; ++j) {
    e[j] = 1.0;
    apply(e, y);
    out.col(j) = y;
    e[j] = 0.0;
  }
  return out;
}

Vec SymmetricOperator::operator*(const Vec& x) const {
  Vec y(dim);
  apply(x, y);
  return y;
}

int power_iteration_count(Index n, double eps, double range_bound, double c) {
  require(eps > 0.0, "power_iteration_count: eps must be positive");
  if (range_bound <= 0.0 || n <= 1) return 1;
  const double gamma = eps / range_bound;
  const double k = std::ceil(c * std::log(static_cast<double>(n)) / gamma);
  require(k < 2e9, "power_iteration_count: iteration count overflows");
  return std::max(1, static_cast<int>(k));
}

namespace {

Vec start_vector(Index n, CounterRng& rng, const EigOptions& opt) {
  switch (opt.start) {
    case EigOptions::Start::uniform:
      return Vec::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    case EigOptions::Start::given: {
      require(opt.start_vector.size() == n, "eigensolver: start vector has wrong size");
      const double nrm = opt.start_vector.norm();
      require(nrm > 0.0, "eigensolver: start vector is zero");
      return opt.start_vector / nrm;
    }
    case EigOptions::Start::random:
      break;
  }
  return rng.unit_vector(n);
}

void check_matvec(const Vec& y) {
  if (!y.allFinite()) throw NumericalError("eigensolver: matvec produced non-finite values");
}

// Largest eigenvector of sign * M.
EigResult power_method(const SymmetricOperator& m, double sign, double eps, double range_bound, CounterRng& rng,
                       const EigOptions& opt) {
  const Index n = m.dim;
  EigResult out;
  Vec v = start_vector(n, rng, opt);
  Vec w(n);
  const int iters = opt.iterations ? *opt.iterations : power_iteration_count(n, eps, range_bound, opt.c);
  require(iters >= 0, "eigensolver: negative iteration count");
  double shift = opt.shift ? *opt.shift : 0.5 * range_bound;

  int done = 0;
  if (opt.shift_at_least_start_norm && iters > 0) {
    m.apply(v, w);
    ++out.matvecs;
    check_matvec(w);
    w *= sign;
    shift = std::max(shift, w.norm());
    w += shift * v;
    const double nrm = w.norm();
    if (nrm > 0.0) v = w / nrm;
    done = 1;
  }
  for (; done < iters; ++done) {
    m.apply(v, w);
    ++out.matvecs;
    check_matvec(w);
    w = sign * w + shift * v;
    const double nrm = w.norm();
    if (nrm == 0.0) break;  // zero operator: any unit vector is exact
    v = w / nrm;
  }
  out.iterations = done;
  m.apply(v, w);
  ++out.matvecs;
  check_matvec(w);
  out.v = v;
  out.rayleigh = v.dot(w);
  return out;
}

// Lanczos with full reorthogonalization; returns the extreme Ritz vector of sign * M.
EigResult lanczos(const SymmetricOperator& m, double sign, double eps, double range_bound, CounterRng& rng,
                  const EigOptions& opt) {
  const Index n = m.dim;
  // Krylov dimension never exceeds n, so a tight eps only saturates the budget
  Index budget = n;
  if (opt.iterations)
    budget = *opt.iterations;
  else if (range_bound > 0.0 && n > 1)
    budget = static_cast<Index>(std::min<double>(n, std::ceil(opt.c * std::log(static_cast<double>(n)) * range_bound / eps)));
  const Index steps = std::clamp<Index>(budget, 1, n);
  EigResult out;
  Mat q(n, steps);
  Vec alpha = Vec::Zero(steps), beta = Vec::Zero(steps);
  q.col(0) = start_vector(n, rng, opt);
  Vec w(n);
  Index used = 0;
  for (Index j = 0; j < steps; ++j) {
    m.apply(q.col(j), w);
    ++out.matvecs;
    check_matvec(w);
    w *= sign;
    alpha[j] = q.col(j).dot(w);
    for (int pass = 0; pass < 2; ++pass) w -= q.leftCols(j + 1) * (q.leftCols(j + 1).transpose() * w);
    used = j + 1;
    const double b = w.norm();
    if (j + 1 == steps || b <= 1e-14 * std::max(1.0, std::abs(alpha[j]))) break;
    beta[j] = b;
    q.col(j + 1) = w / b;
  }
  Mat t = Mat::Zero(used, used);
  for (Index j = 0; j < used; ++j) {
    t(j, j) = alpha[j];
    if (j + 1 < used) t(j, j + 1) = t(j + 1, j) = beta[j];
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(t);
  Vec v = q.leftCols(used) * es.eigenvectors().col(used - 1);
  v.normalize();
  out.iterations = static_cast<int>(used);
  m.apply(v, w);
  ++out.matvecs;
  check_matvec(w);
  out.v = v;
  out.rayleigh = v.dot(w);
  return out;
}

EigResult extreme_ev(const SymmetricOperator& m, double sign, double eps, double range_bound, CounterRng& rng,
                     const EigOptions& opt) {
  require(m.dim >= 1 && m.apply, "eigensolver: empty operator");
  require(eps > 0.0, "eigensolver: eps must be positive");
  require(range_bound >= 0.0, "eigensolver: range bound must be nonnegative");
  return opt.method == EigOptions::Method::lanczos ? lanczos(m, sign, eps, range_bound, rng, opt)
                                                   : power_method(m, sign, eps, range_bound, rng, opt);
}

}  // namespace

EigResult approx_largest_ev(const SymmetricOperator& m, double eps, double range_bound, CounterRng& rng,
                            const EigOptions& opt) {
  return extreme_ev(m, 1.0, eps, range_bound, rng, opt);
}

EigResult approx_smallest_ev(const SymmetricOperator& m, double eps, double range_bound, CounterRng& rng,
                             const EigOptions& opt) {
  // rayleigh is taken with M itself, so it already has the right sign
  return extreme_ev(m, -1.0, eps, range_bound, rng, opt);
}

double spectral_range_bound(const SymmetricOperator& m) {
  if (m.dense) return spectral_range_bound(*m.dense);
  require(m.frobenius || m.row_sum_bound, "spectral_range_bound: operator carries no norm information");
  double b = kInf;
  if (m.frobenius) b = std::min(b, *m.frobenius);
  if (m.row_sum_bound) b = std::min(b, *m.row_sum_bound);
  return 2.0 * b;
}

double spectral_range_bound(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return 2.0 * std::min(m.norm(), m.cwiseAbs().rowwise().sum().maxCoeff());
}

DenseEig dense_eig_oracle(const Mat& m) {
  require(m.rows() == m.cols(), "dense_eig_oracle: matrix must be square");
  require(m.rows() <= 500, "dense_eig_oracle: limited to n <= 500");
  const Index n = m.rows();
  Mat a = 0.5 * (m + m.transpose());
  Mat v = Mat::Identity(n, n);
  const double tol = 1e-12 * std::max(1.0, a.norm());
  auto off = [&] {
    double s = 0.0;
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };
  int sweeps = 0;
  while (off() > tol && sweeps < 100) {
    ++sweeps;
    for (Index p = 0; p < n - 1; ++p)
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // rotation angle that zeroes a(p,q)
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }
  if (off() > tol) throw NumericalError("dense_eig_oracle: Jacobi sweeps did not converge");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) { return a(i, i) > a(j, j); });
  DenseEig out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  out.sweeps = sweeps;
  return out;
}

}  // namespace fw
