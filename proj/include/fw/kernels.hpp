#pragma once

#include <span>
#include <vector>

#include "fw/common.hpp"

// Data-parallel inner loops. Every kernel has a plain serial reference in
// fw::kernels::serial and an OpenMP version in fw::kernels::parallel; the
// unqualified entry points dispatch to the parallel version when it was
// compiled in. Parallel reductions use a fixed chunking so results do not
// depend on the thread count.

namespace fw::kernels {

/// Sparsity pattern of observed (row, col) positions of an m x n matrix, with
/// row- and column-major orderings for gather-style products.
struct BipartitePattern {
  Index rows = 0;
  Index cols = 0;
  std::vector<int> row;  ///< entry -> row index
  std::vector<int> col;  ///< entry -> column index

  std::vector<std::size_t> row_ptr;   ///< rows+1 offsets into by_row
  std::vector<int> by_row;            ///< entries grouped by row, ascending
  std::vector<std::size_t> col_ptr;   ///< cols+1 offsets into by_col
  std::vector<int> by_col;            ///< entries grouped by column, ascending

  BipartitePattern() = default;
  BipartitePattern(Index m, Index n, std::vector<int> rows_of, std::vector<int> cols_of);

  std::size_t nnz() const { return row.size(); }
};

/// Chunk length used by deterministic reductions.
inline constexpr std::size_t kReduceChunk = 4096;

namespace serial {

/// y_top = s * W x_bot, y_bot = s * W^T x_top where W holds `weights` on the pattern.
void bipartite_apply(const BipartitePattern& p, std::span<const double> weights,
                     std::span<const double> x_top, std::span<const double> x_bot,
                     std::span<double> y_top, std::span<double> y_bot, double s = 1.0);

/// sum_e weights[e] * a[row e] * b[col e]
double bipartite_bilinear(const BipartitePattern& p, std::span<const double> weights,
                          std::span<const double> a, std::span<const double> b);

/// values[e] = (1 - alpha) values[e] + alpha * scale * a[row e] * b[col e]
void blend_rank_one(const BipartitePattern& p, std::span<double> values, double alpha,
                    double scale, std::span<const double> a, std::span<const double> b);

void dense_symv(const Mat& m, std::span<const double> x, std::span<double> y);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace serial

namespace parallel {

void bipartite_apply(const BipartitePattern& p, std::span<const double> weights,
                     std::span<const double> x_top, std::span<const double> x_bot,
                     std::span<double> y_top, std::span<double> y_bot, double s = 1.0);
double bipartite_bilinear(const BipartitePattern& p, std::span<const double> weights,
                          std::span<const double> a, std::span<const double> b);
void blend_rank_one(const BipartitePattern& p, std::span<double> values, double alpha,
                    double scale, std::span<const double> a, std::span<const double> b);
void dense_symv(const Mat& m, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> a, std::span<const double> b);

}  // namespace parallel

bool have_openmp();
int max_threads();

inline void bipartite_apply(const BipartitePattern& p, std::span<const double> weights,
                            std::span<const double> x_top, std::span<const double> x_bot,
                            std::span<double> y_top, std::span<double> y_bot, double s = 1.0) {
  parallel::bipartite_apply(p, weights, x_top, x_bot, y_top, y_bot, s);
}
inline double bipartite_bilinear(const BipartitePattern& p, std::span<const double> weights,
                                 std::span<const double> a, std::span<const double> b) {
  return parallel::bipartite_bilinear(p, weights, a, b);
}
inline void blend_rank_one(const BipartitePattern& p, std::span<double> values, double alpha,
                           double scale, std::span<const double> a, std::span<const double> b) {
  parallel::blend_rank_one(p, values, alpha, scale, a, b);
}
inline void dense_symv(const Mat& m, std::span<const double> x, std::span<double> y) {
  parallel::dense_symv(m, x, y);
}
inline double dot(std::span<const double> a, std::span<const double> b) {
  return parallel::dot(a, b);
}

inline std::span<const double> view(const Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
inline std::span<double> view(Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

}  // namespace fw::kernels
