#include "fw/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace fw {

Mat BlockEmbedding::embed(const Mat& v, const Mat& z, const Mat& w) const {
  require(v.rows() == m && v.cols() == m && w.rows() == n && w.cols() == n && z.rows() == m && z.cols() == n,
          "BlockEmbedding::embed: block shapes do not match");
  Mat x(total(), total());
  x.topLeftCorner(m, m) = v;
  x.topRightCorner(m, n) = z;
  x.bottomLeftCorner(n, m) = z.transpose();
  x.bottomRightCorner(n, n) = w;
  return x;
}

Mat BlockEmbedding::embed_offdiag(const Mat& z) const { return embed(Mat::Zero(m, m), z, Mat::Zero(n, n)); }

namespace {

DenseMatrixObjective lift(const RectObjective& f) {
  require(f.eval && f.grad, "lift: objective needs eval and grad");
  require(f.m >= 1 && f.n >= 1, "lift: empty rectangle");
  const BlockEmbedding e{f.m, f.n};
  DenseMatrixObjective out;
  out.n = e.total();
  out.eval = [f, e](const Mat& x) {
    require(x.rows() == e.total() && x.cols() == e.total(), "lifted objective: dimension mismatch");
    return f.eval(e.extract_z(x));
  };
  out.grad = [f, e](const Mat& x) -> Mat {
    require(x.rows() == e.total() && x.cols() == e.total(), "lifted objective: dimension mismatch");
    const Mat g = f.grad(e.extract_z(x));
    require(g.rows() == f.m && g.cols() == f.n, "lifted objective: gradient has wrong shape");
    return 0.5 * e.embed_offdiag(g);
  };
  // a symmetric direction D moves Z by its off-diagonal block B with ||D||_F^2 >= 2 ||B||_F^2
  if (f.hessian_bound) out.hessian_bound = 0.5 * *f.hessian_bound;
  if (f.exact_line_search)
    out.exact_line_search = [f, e](const Mat& x, const Mat& s) {
      return f.exact_line_search(e.extract_z(x), e.extract_z(s));
    };
  return out;
}

}  // namespace

DenseMatrixObjective nuclear_to_spect(const RectObjective& f) { return lift(f); }

DenseMatrixObjective maxnorm_to_boundeddiag(const RectObjective& f) { return lift(f); }

Factorization extract_factorization(const FactoredPSD& x, Index m) {
  require(m >= 1 && m < x.dim(), "extract_factorization: bad split");
  const Index n = x.dim() - m;
  const auto k = static_cast<Index>(x.size());
  Factorization out{Mat(m, k), Mat(n, k)};
  for (Index j = 0; j < k; ++j) {
    const double c = std::sqrt(x.scale() * x.weights()[static_cast<std::size_t>(j)]);
    const Vec& v = x.vectors()[static_cast<std::size_t>(j)];
    out.l.col(j) = c * v.head(m);
    out.r.col(j) = c * v.tail(n);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void check_weights(const Vec& p, const Vec& q, Index m, Index n) {
  require(p.size() == m && q.size() == n, "weighted nuclear norm: weight length mismatch");
  require((p.array() > 0.0).all() && (q.array() > 0.0).all(), "weighted nuclear norm: weights must be positive");
}

}  // namespace

RectObjective weighted_nuclear_wrap(const RectObjective& f, const Vec& p, const Vec& q) {
  check_weights(p, q, f.m, f.n);
  const Vec pinv = p.cwiseSqrt().cwiseInverse();
  const Vec qinv = q.cwiseSqrt().cwiseInverse();
  RectObjective out;
  out.m = f.m;
  out.n = f.n;
  auto unwrap = [pinv, qinv](const Mat& zbar) -> Mat { return pinv.asDiagonal() * zbar * qinv.asDiagonal(); };
  out.eval = [f, unwrap](const Mat& zbar) { return f.eval(unwrap(zbar)); };
  out.grad = [f, unwrap](const Mat& zbar) -> Mat { return unwrap(f.grad(unwrap(zbar))); };
  if (f.hessian_bound) {
    const double s = pinv.maxCoeff() * qinv.maxCoeff();
    out.hessian_bound = *f.hessian_bound * s * s;
  }
  if (f.exact_line_search)
    out.exact_line_search = [f, unwrap](const Mat& z, const Mat& s) { return f.exact_line_search(unwrap(z), unwrap(s)); };
  return out;
}

Mat weighted_unwrap(const Mat& zbar, const Vec& p, const Vec& q) {
  check_weights(p, q, zbar.rows(), zbar.cols());
  return p.cwiseSqrt().cwiseInverse().asDiagonal() * zbar * q.cwiseSqrt().cwiseInverse().asDiagonal();
}

double weighted_nuclear_norm(const Mat& z, const Vec& p, const Vec& q) {
  check_weights(p, q, z.rows(), z.cols());
  return nuclear_norm_oracle(p.cwiseSqrt().asDiagonal() * z * q.cwiseSqrt().asDiagonal());
}

double nuclear_norm_oracle(const Mat& z) {
  if (z.size() == 0) return 0.0;
  const DenseEig eig = dense_eig_oracle(z.transpose() * z);
  double s = 0.0;
  for (Index i = 0; i < eig.values.size(); ++i) s += std::sqrt(std::max(0.0, eig.values[i]));
  return s;
}

// ---------------------------------------------------------------------------

namespace {

double max_row_sq(const Mat& a) { return a.rows() ? a.rowwise().squaredNorm().maxCoeff() : 0.0; }

// Smallest t with Y + max(0, -lambda_min) I inside the t-box.
double completion_level(const Mat& y) {
  Eigen::SelfAdjointEigenSolver<Mat> es(y, Eigen::EigenvaluesOnly);
  return y.diagonal().maxCoeff() + std::max(0.0, -es.eigenvalues()(0));
}

// An optimal completion can be taken with constant diagonal t, so
// ||Z||_max = min over y of lambda_max(-[0 Z; Z^T 0] - A(y)), where A(y) fills the
// off-diagonal entries of the two diagonal blocks. Any y certifies its value.
class DiagonalBlockPencil {
 public:
  explicit DiagonalBlockPencil(const Mat& z) : m_(z.rows()), n_(z.cols()) {
    base_ = -BlockEmbedding{m_, n_}.embed_offdiag(z);
    for (Index b = 0; b < 2; ++b) {
      const Index off = b ? m_ : 0, k = b ? n_ : m_;
      for (Index j = 0; j < k; ++j)
        for (Index i = j + 1; i < k; ++i) slots_.push_back({off + i, off + j});
    }
  }

  Index size() const { return static_cast<Index>(slots_.size()); }

  Mat matrix(const Vec& y) const {
    Mat a = base_;
    for (Index s = 0; s < size(); ++s) {
      const auto [i, j] = slots_[static_cast<std::size_t>(s)];
      a(i, j) -= y[s];
      a(j, i) -= y[s];
    }
    return a;
  }

  // y read off a completion: its diagonal blocks minus their diagonals
  Vec from_completion(const Mat& x) const {
    Vec y(size());
    for (Index s = 0; s < size(); ++s) {
      const auto [i, j] = slots_[static_cast<std::size_t>(s)];
      y[s] = x(i, j);
    }
    return y;
  }

  double lambda_max(const Vec& y) const {
    Eigen::SelfAdjointEigenSolver<Mat> es(matrix(y), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(es.eigenvalues().size() - 1);
  }

  // (1/mu) log sum exp(mu lambda_i) and its gradient in y
  double softmax(const Vec& y, double mu, Vec& grad) const {
    Eigen::SelfAdjointEigenSolver<Mat> es(matrix(y));
    const Vec& ev = es.eigenvalues();
    const double top = ev(ev.size() - 1);
    Vec w = (mu * (ev.array() - top)).exp();
    const double sum = w.sum();
    w /= sum;
    const Mat pw = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
    grad.resize(size());
    for (Index s = 0; s < size(); ++s) {
      const auto [i, j] = slots_[static_cast<std::size_t>(s)];
      grad[s] = -2.0 * pw(i, j);
    }
    return top + std::log(sum) / mu;
  }

 private:
  Index m_, n_;
  Mat base_;
  std::vector<std::pair<Index, Index>> slots_;
};

// BFGS on the soft-max with mu increasing; returns the best certified lambda_max.
// Stops once that is within 1e-9 * scale of a known lower bound.
double minimize_pencil(const DiagonalBlockPencil& pen, Vec y, double scale, double lower) {
  double best = pen.lambda_max(y);
  if (pen.size() == 0) return best;
  const Index d = pen.size();
  for (double mu = 10.0 / scale; mu <= 1e8 / scale && best - lower > 1e-9 * scale; mu *= 10.0) {
    Vec g;
    double f = pen.softmax(y, mu, g);
    Mat h = Mat::Identity(d, d) / mu;  // inverse Hessian estimate
    bool fresh = true;
    for (int it = 0; it < 400 && g.norm() > 1e-13; ++it) {
      const Vec dir = -h * g;
      double step = 1.0, fn = 0.0;
      Vec yn, gn;
      bool moved = false;
      for (int ls = 0; ls < 40; ++ls, step *= 0.5) {
        yn = y + step * dir;
        fn = pen.softmax(yn, mu, gn);
        if (fn <= f + 1e-4 * step * g.dot(dir)) {
          moved = true;
          break;
        }
      }
      if (!moved) {
        if (fresh) break;
        h = Mat::Identity(d, d) / mu;
        fresh = true;
        continue;
      }
      fresh = false;
      const Vec s = yn - y, q = gn - g;
      const double sq = s.dot(q);
      if (sq > 1e-300) {
        const Vec hq = h * q;
        h += ((sq + q.dot(hq)) / (sq * sq)) * s * s.transpose() - (hq * s.transpose() + s * hq.transpose()) / sq;
      }
      y = yn;
      g = gn;
      const double drop = f - fn;
      f = fn;
      if (drop <= 1e-15 * scale) break;
    }
    best = std::min(best, pen.lambda_max(y));
  }
  return best;
}

// ||Z||_max = max over p in the simplex of 2 ||diag(sqrt a) Z diag(sqrt b)||_nuc
// with p = (a; b): for fixed p the best completion has value p . diag(X), so
// every p gives a lower bound and diag(X*(p)) is a supergradient. Exponentiated
// ascent on p; the weighted average of the X*(p) is a feasible completion.
struct DualAscent {
  double lower = 0.0;
  double upper = kInf;
  Mat completion;
};

DualAscent max_norm_dual(const Mat& z, int iters) {
  const Index m = z.rows(), n = z.cols(), N = m + n;
  const BlockEmbedding emb{m, n};
  DualAscent out;
  Vec p = Vec::Constant(N, 1.0 / static_cast<double>(N));
  Mat avg = Mat::Zero(N, N);
  double wsum = 0.0;
  const auto inv_sqrt = [](const Vec& x) {
    return x.unaryExpr([](double v) { return v > 1e-300 ? 1.0 / std::sqrt(v) : 0.0; }).eval();
  };
  for (int it = 0; it < iters; ++it) {
    const Vec sa = p.head(m).cwiseSqrt(), sb = p.tail(n).cwiseSqrt();
    Eigen::JacobiSVD<Mat> svd(sa.asDiagonal() * z * sb.asDiagonal(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& sv = svd.singularValues();
    out.lower = std::max(out.lower, 2.0 * sv.sum());
    const Vec ia = inv_sqrt(p.head(m)), ib = inv_sqrt(p.tail(n));
    const Mat xv = ia.asDiagonal() * svd.matrixU() * sv.asDiagonal() * svd.matrixU().transpose() * ia.asDiagonal();
    const Mat xw = ib.asDiagonal() * svd.matrixV() * sv.asDiagonal() * svd.matrixV().transpose() * ib.asDiagonal();
    const double w = it + 1.0;
    avg += w * emb.embed(xv, z, xw);
    wsum += w;
    if (it % 50 == 49) {
      const Mat y = avg / wsum;
      const double up = completion_level(y);
      if (up < out.upper) {
        out.upper = up;
        out.completion = y;
      }
      if (out.upper - out.lower <= 1e-7 * std::max(1.0, out.lower)) break;
    }
    Vec g(N);
    g << xv.diagonal(), xw.diagonal();
    const double eta = 1.0 / (std::sqrt(w) * std::max(1e-12, g.maxCoeff()));
    Vec lp = p.array().max(1e-300).log() + eta * g.array();
    lp.array() -= lp.maxCoeff();
    p = lp.array().exp();
    p /= p.sum();
  }
  return out;
}

}  // namespace

MaxNormBounds max_norm_bounds(const Mat& z) {
  const Index m = z.rows(), n = z.cols();
  require(m >= 1 && n >= 1 && m <= 6 && n <= 6, "max_norm_oracle: sizes up to 6 x 6 only");
  const double scale = z.cwiseAbs().maxCoeff();
  if (scale == 0.0) return {0.0, 0.0};
  const DualAscent dual = max_norm_dual(z, 1000);

  // |Z_ij| <= ||L_i|| ||R_j||, and ||Z||_nuc <= sqrt(mn) ||Z||_max
  const double nuc = Eigen::JacobiSVD<Mat>(z).singularValues().sum();
  const double lo = std::max({dual.lower, scale, nuc / std::sqrt(double(m * n))});
  double hi = std::min({dual.upper, std::sqrt(max_row_sq(z)), std::sqrt(max_row_sq(z.transpose()))});

  const DiagonalBlockPencil pen(z);
  const Vec y0 = dual.completion.size() ? pen.from_completion(dual.completion) : Vec::Zero(pen.size());
  hi = std::min(hi, minimize_pencil(pen, y0, scale, lo));
  return {std::min(lo, hi), hi};
}

double max_norm_oracle(const Mat& z) { return max_norm_bounds(z).upper; }

SdpFeasibility nuclear_sdp_feasible(const Mat& z, double t) {
  const BlockEmbedding e{z.rows(), z.cols()};
  const DenseEig eig = dense_eig_oracle(e.embed_offdiag(z));
  // [0 Z; Z^T 0] has eigenpairs (+-sigma, (u; +-v)/sqrt 2); twice its positive
  // part is [ (ZZ^T)^1/2  Z; Z^T  (Z^TZ)^1/2 ], the minimal-trace completion
  const double tiny = 1e-14 * std::max(1.0, eig.values.cwiseAbs().maxCoeff());
  Mat x = Mat::Zero(e.total(), e.total());
  Mat q = Mat::Zero(e.m, e.n);
  for (Index i = 0; i < eig.values.size(); ++i) {
    if (eig.values[i] <= tiny) continue;
    const Vec& w = eig.vectors.col(i);
    x += 2.0 * eig.values[i] * w * w.transpose();
    q += 2.0 * w.head(e.m) * w.tail(e.n).transpose();
  }
  SdpFeasibility out;
  out.value = x.trace();
  out.feasible = out.value <= t;
  if (out.feasible) {
    out.x = std::move(x);
    out.x.topRightCorner(e.m, e.n) = z;
    out.x.bottomLeftCorner(e.n, e.m) = z.transpose();
  } else {
    out.witness = Mat::Identity(e.total(), e.total());
    out.witness.topRightCorner(e.m, e.n) = -q;
    out.witness.bottomLeftCorner(e.n, e.m) = -q.transpose();
  }
  return out;
}

SdpFeasibility maxnorm_sdp_feasible(const Mat& z, double t, int max_iters) {
  const BlockEmbedding e{z.rows(), z.cols()};
  const Index N = e.total();
  SdpFeasibility out;
  out.value = kInf;
  // cheap necessary conditions: 2x2 minors and the nuclear-norm inequality
  const double nuc = Eigen::JacobiSVD<Mat>(z).singularValues().sum();
  if (z.cwiseAbs().maxCoeff() > t || nuc > t * std::sqrt(double(e.m * e.n))) return out;

  // alternating projections approach the intersection from outside the cone,
  // so cap the diagonal a little below t to leave room for the final shift
  const double cap = t - std::min(2e-4, 0.5 * t);
  Mat y = e.embed_offdiag(z);
  y.diagonal().setConstant(cap);
  Eigen::SelfAdjointEigenSolver<Mat> es;
  double prev_dist = kInf;
  for (int it = 0; it < max_iters; ++it) {
    es.compute(y);
    const double lmin = es.eigenvalues()(0);
    const double maxdiag = y.diagonal().maxCoeff();
    out.value = std::min(out.value, maxdiag + std::max(0.0, -lmin));
    if (maxdiag + std::max(0.0, -lmin) <= t) {
      out.feasible = true;
      out.x = y;
      if (lmin < 0.0) out.x.diagonal().array() -= lmin;
      return out;
    }
    // project onto the psd cone, then back onto {Z block fixed, diag <= t}
    const Vec lam = es.eigenvalues().cwiseMax(0.0);
    const Mat p = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
    const double dist = (p - y).norm();
    y = p;
    y.topRightCorner(e.m, e.n) = z;
    y.bottomLeftCorner(e.n, e.m) = z.transpose();
    for (Index i = 0; i < N; ++i) y(i, i) = std::min(y(i, i), cap);
    // the distance between the sets stops shrinking once they are apart
    if (it % 200 == 199) {
      if (prev_dist - dist <= 1e-12 * std::max(1.0, dist) && dist > 1e-9) break;
      prev_dist = dist;
    }
  }
  return out;
}

}  // namespace fw
