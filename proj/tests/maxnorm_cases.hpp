#pragma once

#include <vector>

#include "fw/common.hpp"

namespace fwtest {

// Max-norms computed by an interior-point solve of the completion SDP.
struct MaxNormCase {
  int m;
  int n;
  std::vector<double> z;  // row-major
  double max_norm;
  double t;  // level for the feasibility comparison

  fw::Mat matrix() const {
    fw::Mat a(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = z[static_cast<std::size_t>(i * n + j)];
    return a;
  }
};

inline const std::vector<MaxNormCase>& maxnorm_cases() {
  static const std::vector<MaxNormCase> cases = {
#include "data/maxnorm_cases.inc"
  };
  return cases;
}

}  // namespace fwtest
