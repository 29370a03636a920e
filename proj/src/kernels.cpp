#include "fw/kernels.hpp"

#include <algorithm>
#include <numeric>

#ifdef FW_HAVE_OPENMP
#include <omp.h>
#endif

namespace fw::kernels {

BipartitePattern::BipartitePattern(Index m, Index n, std::vector<int> rows_of, std::vector<int> cols_of)
    : rows(m), cols(n), row(std::move(rows_of)), col(std::move(cols_of)) {
  require(row.size() == col.size(), "BipartitePattern: row/col length mismatch");
  const std::size_t nnz = row.size();
  row_ptr.assign(static_cast<std::size_t>(m) + 1, 0);
  col_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  for (std::size_t e = 0; e < nnz; ++e) {
    require(row[e] >= 0 && row[e] < m && col[e] >= 0 && col[e] < n,
            "BipartitePattern: index out of range");
    ++row_ptr[row[e] + 1];
    ++col_ptr[col[e] + 1];
  }
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
  std::partial_sum(col_ptr.begin(), col_ptr.end(), col_ptr.begin());
  by_row.resize(nnz);
  by_col.resize(nnz);
  std::vector<std::size_t> rfill(row_ptr.begin(), row_ptr.end() - 1);
  std::vector<std::size_t> cfill(col_ptr.begin(), col_ptr.end() - 1);
  // counting sort keeps entry order stable inside each row/column
  for (std::size_t e = 0; e < nnz; ++e) {
    by_row[rfill[row[e]]++] = static_cast<int>(e);
    by_col[cfill[col[e]]++] = static_cast<int>(e);
  }
}

namespace serial {

void bipartite_apply(const BipartitePattern& p, std::span<const double> w,
                     std::span<const double> x_top, std::span<const double> x_bot,
                     std::span<double> y_top, std::span<double> y_bot, double s) {
  std::fill(y_top.begin(), y_top.end(), 0.0);
  std::fill(y_bot.begin(), y_bot.end(), 0.0);
  for (std::size_t e = 0; e < p.nnz(); ++e) {
    y_top[p.row[e]] += w[e] * x_bot[p.col[e]];
    y_bot[p.col[e]] += w[e] * x_top[p.row[e]];
  }
  if (s != 1.0) {
    for (auto& y : y_top) y *= s;
    for (auto& y : y_bot) y *= s;
  }
}

double bipartite_bilinear(const BipartitePattern& p, std::span<const double> w,
                          std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t e = 0; e < p.nnz(); ++e) acc += w[e] * a[p.row[e]] * b[p.col[e]];
  return acc;
}

void blend_rank_one(const BipartitePattern& p, std::span<double> values, double alpha,
                    double scale, std::span<const double> a, std::span<const double> b) {
  const double keep = 1.0 - alpha;
  const double add = alpha * scale;
  for (std::size_t e = 0; e < p.nnz(); ++e)
    values[e] = keep * values[e] + add * a[p.row[e]] * b[p.col[e]];
}

void dense_symv(const Mat& m, std::span<const double> x, std::span<double> y) {
  const Index n = m.rows();
  for (Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Index j = 0; j < m.cols(); ++j) acc += m(i, j) * x[j];
    y[i] = acc;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace serial

namespace parallel {
namespace {

// Fixed-chunk reduction: partial sums per chunk, combined in chunk order.
template <class Body>
double chunked_sum(std::size_t n, Body&& body) {
  const std::size_t chunks = (n + kReduceChunk - 1) / kReduceChunk;
  std::vector<double> partial(chunks, 0.0);
  const auto nc = static_cast<std::ptrdiff_t>(chunks);
#pragma omp parallel for schedule(static) if (chunks > 1)
  for (std::ptrdiff_t c = 0; c < nc; ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * kReduceChunk;
    const std::size_t hi = std::min(n, lo + kReduceChunk);
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += body(i);
    partial[c] = acc;
  }
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

}  // namespace

void bipartite_apply(const BipartitePattern& p, std::span<const double> w,
                     std::span<const double> x_top, std::span<const double> x_bot,
                     std::span<double> y_top, std::span<double> y_bot, double s) {
  const std::size_t nnz = p.nnz();
  const auto m = static_cast<std::size_t>(p.rows);
  const auto n = static_cast<std::size_t>(p.cols);
  // a fixed number of contiguous entry blocks, each scattering into its own
  // buffer; buffers are summed in block order, so the result does not depend
  // on the thread count
  const std::size_t blocks = std::clamp<std::size_t>(nnz / (4 * kReduceChunk), 1, 16);
  if (blocks == 1) {
    serial::bipartite_apply(p, w, x_top, x_bot, y_top, y_bot, s);
    return;
  }
  const std::size_t width = m + n;
  std::vector<double> buf(blocks * width, 0.0);
  const auto nb = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel
  {
#pragma omp for schedule(static)
    for (std::ptrdiff_t b = 0; b < nb; ++b) {
      double* top = buf.data() + static_cast<std::size_t>(b) * width;
      double* bot = top + m;
      const std::size_t lo = nnz * static_cast<std::size_t>(b) / blocks;
      const std::size_t hi = nnz * static_cast<std::size_t>(b + 1) / blocks;
      for (std::size_t e = lo; e < hi; ++e) {
        top[p.row[e]] += w[e] * x_bot[p.col[e]];
        bot[p.col[e]] += w[e] * x_top[p.row[e]];
      }
    }
    const auto nw = static_cast<std::ptrdiff_t>(width);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < nw; ++i) {
      double acc = 0.0;
      for (std::size_t b = 0; b < blocks; ++b) acc += buf[b * width + static_cast<std::size_t>(i)];
      if (static_cast<std::size_t>(i) < m)
        y_top[static_cast<std::size_t>(i)] = s * acc;
      else
        y_bot[static_cast<std::size_t>(i) - m] = s * acc;
    }
  }
}

double bipartite_bilinear(const BipartitePattern& p, std::span<const double> w,
                          std::span<const double> a, std::span<const double> b) {
  return chunked_sum(p.nnz(), [&](std::size_t e) { return w[e] * a[p.row[e]] * b[p.col[e]]; });
}

void blend_rank_one(const BipartitePattern& p, std::span<double> values, double alpha,
                    double scale, std::span<const double> a, std::span<const double> b) {
  const double keep = 1.0 - alpha;
  const double add = alpha * scale;
  const auto nnz = static_cast<std::ptrdiff_t>(p.nnz());
#pragma omp parallel for schedule(static) if (nnz > 20000)
  for (std::ptrdiff_t e = 0; e < nnz; ++e)
    values[e] = keep * values[e] + add * a[p.row[e]] * b[p.col[e]];
}

void dense_symv(const Mat& m, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(m.rows());
  const Index cols = m.cols();
  // column-major storage: use symmetry and read column i as row i
#pragma omp parallel for schedule(static) if (n > 256)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double* ci = m.data() + i * m.rows();
    double acc = 0.0;
    for (Index j = 0; j < cols; ++j) acc += ci[j] * x[j];
    y[i] = acc;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  return chunked_sum(a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

}  // namespace parallel

bool have_openmp() {
#ifdef FW_HAVE_OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads() {
#ifdef FW_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace fw::kernels
