#pragma once

#include <functional>
#include <optional>

#include "fw/rng.hpp"
#include "fw/spectahedron.hpp"

namespace fw {

/// Symmetric (m+n) x (m+n) matrices viewed as blocks [V Z; Z^T W].
struct BlockEmbedding {
  Index m = 0;
  Index n = 0;

  Index total() const { return m + n; }
  Mat embed(const Mat& v, const Mat& z, const Mat& w) const;
  /// [0 Z; Z^T 0]
  Mat embed_offdiag(const Mat& z) const;
  Mat extract_z(const Mat& x) const { return x.topRightCorner(m, n); }
  Mat extract_v(const Mat& x) const { return x.topLeftCorner(m, m); }
  Mat extract_w(const Mat& x) const { return x.bottomRightCorner(n, n); }
};

/// f over m x n matrices.
struct RectObjective {
  Index m = 0;
  Index n = 0;
  std::function<double(const Mat&)> eval;
  std::function<Mat(const Mat&)> grad;
  std::optional<double> hessian_bound;  ///< sup lambda_max of the Hessian in Z
  std::function<double(const Mat& z, const Mat& s)> exact_line_search;
};

/// f(X) := f(Z-block of X) over t * spectahedron of size m+n. The gradient is
/// 1/2 [0 G; G^T 0], the Frobenius gradient of the lifted function; the
/// eigenvectors are those of [0 G; G^T 0].
DenseMatrixObjective nuclear_to_spect(const RectObjective& f);

/// The same lift, used over the bounded-diagonal box.
DenseMatrixObjective maxnorm_to_boundeddiag(const RectObjective& f);

/// L (m x k), R (n x k) with L R^T equal to the Z block of X.
struct Factorization {
  Mat l;
  Mat r;
};
Factorization extract_factorization(const FactoredPSD& x, Index m);

/// f(P^-1 Zbar Q^-1) with P = diag(sqrt p), Q = diag(sqrt q).
RectObjective weighted_nuclear_wrap(const RectObjective& f, const Vec& p, const Vec& q);
/// Map a solution of the wrapped problem back: Z = P^-1 Zbar Q^-1.
Mat weighted_unwrap(const Mat& zbar, const Vec& p, const Vec& q);
double weighted_nuclear_norm(const Mat& z, const Vec& p, const Vec& q);

/// Sum of singular values from the eigenvalues of Z^T Z.
double nuclear_norm_oracle(const Mat& z);

struct MaxNormBounds {
  double lower = 0.0;  ///< from the dual: max over p in the simplex of 2 ||D_a^1/2 Z D_b^1/2||_nuc
  double upper = 0.0;  ///< backed by an explicit psd completion
};

/// Approximate max-norm (sizes up to 6 x 6). Exponentiated ascent on the dual
/// gives the lower end; the upper end minimizes lambda_max over completions
/// with constant diagonal (smoothed, BFGS), warm-started from the dual.
MaxNormBounds max_norm_bounds(const Mat& z);
/// max_norm_bounds(z).upper
double max_norm_oracle(const Mat& z);

struct SdpFeasibility {
  bool feasible = false;
  Mat x;          ///< psd completion [V Z; Z^T W] when feasible
  Mat witness;    ///< dual matrix Y >= 0 when infeasible (nuclear case)
  double value = 0.0;  ///< tr(V)+tr(W) (nuclear) or max diagonal (max-norm) of the best completion
};

/// Is there a psd [V Z; Z^T W] with tr V + tr W <= t? Builds the minimal-trace
/// completion from the spectrum of [0 Z; Z^T 0]; when its trace exceeds t,
/// returns the psd Y = [I -U V^T; -V U^T I]: Y . X >= 0 for every psd
/// completion X forces tr V + tr W >= 2 <Z, U V^T> = 2 ||Z||_nuc > t.
SdpFeasibility nuclear_sdp_feasible(const Mat& z, double t);

/// Is there a psd [V Z; Z^T W] with every diagonal entry <= t? Alternating
/// projections between the psd cone and the fixed-Z, capped-diagonal set;
/// accepted only once Y + |lambda_min| I has its diagonal under t.
SdpFeasibility maxnorm_sdp_feasible(const Mat& z, double t, int max_iters = 20000);

}  // namespace fw
