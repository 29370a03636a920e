#include "fw/vector_domains.hpp"

#include <cmath>

#include "fw/trace.hpp"

namespace fw {

Vec VectorAtom::point(Index n) const {
  Vec p = Vec::Zero(n);
  switch (kind) {
    case Kind::vertex:
      p[index] = scale;
      break;
    case Kind::signed_vertex:
      p[index] = sign * scale;
      break;
    case Kind::sign_vector:
      for (Index i = 0; i < n; ++i) p[i] = signs[i] * scale;
      break;
    case Kind::origin:
      break;
  }
  return p;
}

double VectorAtom::dot(const Vec& c) const {
  switch (kind) {
    case Kind::vertex:
      return scale * c[index];
    case Kind::signed_vertex:
      return sign * scale * c[index];
    case Kind::sign_vector: {
      double acc = 0.0;
      for (Index i = 0; i < c.size(); ++i) acc += signs[i] * c[i];
      return scale * acc;
    }
    case Kind::origin:
      return 0.0;
  }
  return 0.0;
}

std::string VectorAtom::descriptor() const {
  const std::string s = scale == 1.0 ? "" : format_double(scale);
  switch (kind) {
    case Kind::vertex:
      return s + "e" + std::to_string(index + 1);
    case Kind::signed_vertex:
      return (sign < 0 ? "-" : "+") + s + "e" + std::to_string(index + 1);
    case Kind::sign_vector: {
      std::string out = "s(";
      const std::size_t shown = std::min<std::size_t>(signs.size(), 24);
      for (std::size_t i = 0; i < shown; ++i) out += signs[i] < 0 ? '-' : '+';
      if (shown < signs.size()) out += "...";
      return out + ")";
    }
    case Kind::origin:
      return "0";
  }
  return "?";
}

// ---------------------------------------------------------------------------

VectorAtom simplex_lmo(const Vec& c) {
  require(c.size() > 0, "simplex_lmo: empty gradient");
  Index best = 0;
  for (Index i = 1; i < c.size(); ++i)
    if (c[i] < c[best]) best = i;
  return VectorAtom::vertex(best);
}

double simplex_gap(const Vec& x, const Vec& grad) { return x.dot(grad) - grad.minCoeff(); }

VectorAtom l1_lmo(const Vec& c, double radius) {
  require(c.size() > 0, "l1_lmo: empty gradient");
  Index best = 0;
  for (Index i = 1; i < c.size(); ++i)
    if (std::abs(c[i]) > std::abs(c[best])) best = i;
  return VectorAtom::signed_vertex(best, c[best] > 0.0 ? -1 : 1, radius);
}

double l1_gap(const Vec& x, const Vec& grad, double radius) {
  return radius * grad.cwiseAbs().maxCoeff() + x.dot(grad);
}

VectorAtom cube_lmo(const Vec& c) {
  std::vector<signed char> signs(static_cast<std::size_t>(c.size()));
  for (Index i = 0; i < c.size(); ++i) signs[i] = c[i] > 0.0 ? -1 : 1;
  return VectorAtom::sign_vector(std::move(signs));
}

double cube_gap(const Vec& x, const Vec& grad) { return grad.lpNorm<1>() + x.dot(grad); }

Index cardinality(const Vec& x) { return (x.array() != 0.0).count(); }

// ---------------------------------------------------------------------------

SimplexDomain::SimplexDomain(Index n) : n_(n) { require(n >= 1, "SimplexDomain: n must be >= 1"); }

VectorAtom SimplexDomain::lmo(const Vec& c) const {
  require(c.size() == n_, "SimplexDomain::lmo: dimension mismatch");
  return simplex_lmo(c);
}

double SimplexDomain::gap(const Vec& x, const Vec& grad) const { return simplex_gap(x, grad); }

bool SimplexDomain::contains(const Vec& x) const {
  return x.size() == n_ && (x.array() >= 0.0).all() && std::abs(x.sum() - 1.0) <= 1e-12;
}

std::vector<VectorAtom> SimplexDomain::vertices() const {
  std::vector<VectorAtom> out;
  for (Index i = 0; i < n_; ++i) out.push_back(VectorAtom::vertex(i));
  return out;
}

L1BallDomain::L1BallDomain(Index n, double radius) : n_(n), t_(radius) {
  require(n >= 1, "L1BallDomain: n must be >= 1");
  require(radius > 0.0, "L1BallDomain: radius must be positive");
}

VectorAtom L1BallDomain::lmo(const Vec& c) const {
  require(c.size() == n_, "L1BallDomain::lmo: dimension mismatch");
  return l1_lmo(c, t_);
}

double L1BallDomain::gap(const Vec& x, const Vec& grad) const { return l1_gap(x, grad, t_); }

bool L1BallDomain::contains(const Vec& x) const {
  return x.size() == n_ && x.lpNorm<1>() <= t_ * (1.0 + 1e-12);
}

std::vector<VectorAtom> L1BallDomain::vertices() const {
  std::vector<VectorAtom> out;
  for (Index i = 0; i < n_; ++i)
    for (int s : {1, -1}) out.push_back(VectorAtom::signed_vertex(i, s, t_));
  return out;
}

CubeDomain::CubeDomain(Index n) : n_(n) { require(n >= 1, "CubeDomain: n must be >= 1"); }

VectorAtom CubeDomain::lmo(const Vec& c) const {
  require(c.size() == n_, "CubeDomain::lmo: dimension mismatch");
  return cube_lmo(c);
}

double CubeDomain::gap(const Vec& x, const Vec& grad) const { return cube_gap(x, grad); }

bool CubeDomain::contains(const Vec& x) const {
  return x.size() == n_ && x.cwiseAbs().maxCoeff() <= 1.0 + 1e-12;
}

std::vector<VectorAtom> CubeDomain::vertices() const {
  require(n_ <= 20, "CubeDomain::vertices: too many vertices to enumerate");
  std::vector<VectorAtom> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n_); ++mask) {
    std::vector<signed char> signs(static_cast<std::size_t>(n_));
    for (Index i = 0; i < n_; ++i) signs[i] = (mask >> i) & 1 ? -1 : 1;
    out.push_back(VectorAtom::sign_vector(std::move(signs)));
  }
  return out;
}

std::unique_ptr<VectorDomain> make_vector_domain(const std::string& kind, Index n, double radius) {
  if (kind == "simplex") return std::make_unique<SimplexDomain>(n);
  if (kind == "l1ball" || kind == "l1") return std::make_unique<L1BallDomain>(n, radius);
  if (kind == "cube") return std::make_unique<CubeDomain>(n);
  throw InvalidArgument("unknown vector domain: " + kind);
}

}  // namespace fw
