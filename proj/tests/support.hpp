#pragma once

// Reference oracles for the tests. They deliberately avoid the library's own
// eigensolvers and use Eigen's decompositions or plain enumeration instead.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fw/common.hpp"

namespace fwtest {

using fw::Index;
using fw::Mat;
using fw::Vec;

inline Vec eigenvalues(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();  // ascending
}
inline double lambda_min(const Mat& m) { return eigenvalues(m)[0]; }
inline double lambda_max(const Mat& m) {
  const Vec ev = eigenvalues(m);
  return ev[ev.size() - 1];
}

inline double nuclear_norm_svd(const Mat& z) {
  Eigen::JacobiSVD<Mat> svd(z);
  return svd.singularValues().sum();
}

struct Rand {
  std::mt19937_64 gen;
  explicit Rand(std::uint64_t seed) : gen(seed) {}
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen); }
  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
  int index(int n) { return std::uniform_int_distribution<int>(0, n - 1)(gen); }
  Vec normal_vec(Index n) {
    Vec v(n);
    for (Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }
  Mat normal_mat(Index r, Index c) {
    Mat a(r, c);
    for (Index j = 0; j < c; ++j)
      for (Index i = 0; i < r; ++i) a(i, j) = normal();
    return a;
  }
  Mat symmetric(Index n) {
    const Mat a = normal_mat(n, n);
    return 0.5 * (a + a.transpose());
  }
  Vec unit(Index n) { return normal_vec(n).normalized(); }
  /// Random point of the simplex with the given support size.
  Vec simplex_point(Index n, Index k) {
    std::vector<Index> idx(n);
    for (Index i = 0; i < n; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), gen);
    Vec x = Vec::Zero(n);
    double s = 0.0;
    for (Index i = 0; i < k; ++i) {
      const double e = -std::log(1.0 - uniform());
      x[idx[i]] = e;
      s += e;
    }
    return x / s;
  }
};

/// Central difference of f along d.
template <class F, class P>
double central_diff(const F& f, const P& x, const P& d, double h = 1e-5) {
  return (f(x + h * d) - f(x - h * d)) / (2.0 * h);
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("fwopt_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

}  // namespace fwtest
