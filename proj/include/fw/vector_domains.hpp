#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fw/common.hpp"

namespace fw {

/// Extreme point of a vector domain (or the origin placeholder used to start
/// l1 runs at x = 0).
struct VectorAtom {
  enum class Kind { vertex, signed_vertex, sign_vector, origin };
  Kind kind = Kind::vertex;
  Index index = 0;                  ///< vertex / signed_vertex
  int sign = 1;                     ///< signed_vertex
  std::vector<signed char> signs;   ///< sign_vector
  double scale = 1.0;               ///< radius of scaled domains

  static VectorAtom vertex(Index i, double scale = 1.0) {
    VectorAtom a;
    a.index = i;
    a.scale = scale;
    return a;
  }
  static VectorAtom signed_vertex(Index i, int sign, double scale = 1.0) {
    VectorAtom a = vertex(i, scale);
    a.kind = Kind::signed_vertex;
    a.sign = sign;
    return a;
  }
  static VectorAtom sign_vector(std::vector<signed char> signs) {
    VectorAtom a;
    a.kind = Kind::sign_vector;
    a.signs = std::move(signs);
    return a;
  }
  static VectorAtom origin(double scale = 1.0) {
    VectorAtom a;
    a.kind = Kind::origin;
    a.scale = scale;
    return a;
  }

  /// Dense coordinates in R^n.
  Vec point(Index n) const;
  /// <atom, c> without materializing the point.
  double dot(const Vec& c) const;
  /// Compact tag for traces: e3, -2e7, s(+-+), 0.
  std::string descriptor() const;

  friend bool operator==(const VectorAtom&, const VectorAtom&) = default;
};

/// Compact convex domain in R^n with an exact linear minimization oracle.
class VectorDomain {
 public:
  virtual ~VectorDomain() = default;
  virtual Index dim() const = 0;
  virtual std::string name() const = 0;
  /// Lowest-index minimizer of <s, c> over the domain's vertices.
  virtual VectorAtom lmo(const Vec& c) const = 0;
  /// Closed-form duality gap max_{y in D} <x - y, grad>.
  virtual double gap(const Vec& x, const Vec& grad) const = 0;
  virtual bool contains(const Vec& x) const = 0;
  /// Squared Euclidean diameter.
  virtual double diameter_sq() const = 0;
  /// Every vertex; only for brute-force checks at small n.
  virtual std::vector<VectorAtom> vertices() const = 0;
};

/// Unit simplex {x >= 0, sum x = 1}.
class SimplexDomain final : public VectorDomain {
 public:
  explicit SimplexDomain(Index n);
  Index dim() const override { return n_; }
  std::string name() const override { return "simplex"; }
  VectorAtom lmo(const Vec& c) const override;
  double gap(const Vec& x, const Vec& grad) const override;
  bool contains(const Vec& x) const override;
  double diameter_sq() const override { return n_ > 1 ? 2.0 : 0.0; }
  std::vector<VectorAtom> vertices() const override;

 private:
  Index n_;
};

/// l1 ball of radius t; vertices are +-t e_i.
class L1BallDomain final : public VectorDomain {
 public:
  explicit L1BallDomain(Index n, double radius = 1.0);
  Index dim() const override { return n_; }
  double radius() const { return t_; }
  std::string name() const override { return "l1ball"; }
  VectorAtom lmo(const Vec& c) const override;
  double gap(const Vec& x, const Vec& grad) const override;
  bool contains(const Vec& x) const override;
  double diameter_sq() const override { return 4.0 * t_ * t_; }
  std::vector<VectorAtom> vertices() const override;

 private:
  Index n_;
  double t_;
};

/// Unit cube {||x||_inf <= 1}; vertices are sign vectors.
class CubeDomain final : public VectorDomain {
 public:
  explicit CubeDomain(Index n);
  Index dim() const override { return n_; }
  std::string name() const override { return "cube"; }
  VectorAtom lmo(const Vec& c) const override;
  double gap(const Vec& x, const Vec& grad) const override;
  bool contains(const Vec& x) const override;
  double diameter_sq() const override { return 4.0 * static_cast<double>(n_); }
  std::vector<VectorAtom> vertices() const override;

 private:
  Index n_;
};

// Free-function forms of the oracles.
VectorAtom simplex_lmo(const Vec& c);
double simplex_gap(const Vec& x, const Vec& grad);
VectorAtom l1_lmo(const Vec& c, double radius = 1.0);
double l1_gap(const Vec& x, const Vec& grad, double radius = 1.0);
VectorAtom cube_lmo(const Vec& c);
double cube_gap(const Vec& x, const Vec& grad);

/// Number of nonzero coordinates.
Index cardinality(const Vec& x);

std::unique_ptr<VectorDomain> make_vector_domain(const std::string& kind, Index n, double radius = 1.0);

}  // namespace fw
