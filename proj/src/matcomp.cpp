#include "fw/matcomp.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string_view>
#include <unordered_set>

namespace fw {

void RatingDataset::validate() const {
  auto check = [&](const std::vector<Rating>& split, const char* name) {
    std::unordered_set<long long> seen;
    seen.reserve(split.size() * 2);
    for (const Rating& r : split) {
      if (r.i < 0 || r.i >= m || r.j < 0 || r.j >= n)
        throw DataError(std::string(name) + ": rating index out of range");
      if (!seen.insert(static_cast<long long>(r.i) * n + r.j).second)
        throw DataError(std::string(name) + ": duplicate entry (" + std::to_string(r.i) + ", " +
                        std::to_string(r.j) + ")");
    }
  };
  check(train, "train");
  check(test, "test");
}

MovieLensFormat parse_movielens_format(const std::string& s) {
  if (s == "tab_100k" || s == "100k" || s == "tab") return MovieLensFormat::tab_100k;
  if (s == "dat_1m" || s == "1m" || s == "dat") return MovieLensFormat::dat_1m;
  throw InvalidArgument("unknown ratings format: " + s);
}

namespace {

struct RawRating {
  long long user;
  long long item;
  double y;
};

std::vector<std::string_view> split_fields(std::string_view line, MovieLensFormat format) {
  std::vector<std::string_view> out;
  if (format == MovieLensFormat::dat_1m) {
    std::size_t pos = 0;
    for (;;) {
      const std::size_t next = line.find("::", pos);
      out.push_back(line.substr(pos, next == std::string_view::npos ? next : next - pos));
      if (next == std::string_view::npos) break;
      pos = next + 2;
    }
    return out;
  }
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos == line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
    out.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, out);
  return res.ec == std::errc() && res.ptr == end;
}

std::vector<long long> dense_ids(std::vector<long long> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

int index_of(const std::vector<long long>& sorted, long long id) {
  return static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), id) - sorted.begin());
}

}  // namespace

RatingDataset load_movielens(std::istream& in, MovieLensFormat format, const std::string& name) {
  std::vector<RawRating> raw;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto fields = split_fields(line, format);
    auto fail = [&](const std::string& what) {
      return DataError(name + ":" + std::to_string(lineno) + ": " + what);
    };
    if (fields.size() < 3 || fields.size() > 4) throw fail("expected user, item, rating and timestamp");
    RawRating r{};
    if (!parse_number(fields[0], r.user)) throw fail("bad user id '" + std::string(fields[0]) + "'");
    if (!parse_number(fields[1], r.item)) throw fail("bad item id '" + std::string(fields[1]) + "'");
    if (!parse_number(fields[2], r.y) || !std::isfinite(r.y))
      throw fail("bad rating '" + std::string(fields[2]) + "'");
    long long ts = 0;
    if (fields.size() == 4 && !parse_number(fields[3], ts))
      throw fail("bad timestamp '" + std::string(fields[3]) + "'");
    raw.push_back(r);
  }
  if (raw.empty()) throw DataError(name + ": no ratings found");

  std::vector<long long> users, items;
  users.reserve(raw.size());
  items.reserve(raw.size());
  for (const auto& r : raw) {
    users.push_back(r.user);
    items.push_back(r.item);
  }
  RatingDataset out;
  out.user_ids = dense_ids(std::move(users));
  out.item_ids = dense_ids(std::move(items));
  out.m = static_cast<Index>(out.user_ids.size());
  out.n = static_cast<Index>(out.item_ids.size());
  out.train.reserve(raw.size());
  for (const auto& r : raw) out.train.push_back({index_of(out.user_ids, r.user), index_of(out.item_ids, r.item), r.y});
  out.validate();
  return out;
}

RatingDataset load_movielens(const std::string& path, MovieLensFormat format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open ratings file: " + path);
  return load_movielens(in, format, path);
}

RatingDataset split_train_test(const RatingDataset& data, const SplitPolicy& policy) {
  std::vector<Rating> all = data.train;
  all.insert(all.end(), data.test.begin(), data.test.end());
  RatingDataset out = data;
  out.train.clear();
  out.test.clear();
  CounterRng rng(policy.seed);
  std::vector<char> to_test(all.size(), 0);

  if (policy.kind == SplitPolicy::Kind::random_fraction) {
    require(policy.train_fraction >= 0.0 && policy.train_fraction <= 1.0, "split: fraction must be in [0,1]");
    std::vector<std::size_t> perm(all.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
    const auto h = static_cast<std::size_t>(std::floor(policy.train_fraction * static_cast<double>(all.size())));
    for (std::size_t k = h; k < perm.size(); ++k) to_test[perm[k]] = 1;
  } else {
    require(policy.holdout >= 1, "split: holdout must be >= 1");
    std::vector<std::vector<std::size_t>> by_user(static_cast<std::size_t>(data.m));
    for (std::size_t e = 0; e < all.size(); ++e) by_user[static_cast<std::size_t>(all[e].i)].push_back(e);
    const auto r = static_cast<std::size_t>(policy.holdout);
    for (auto& entries : by_user) {
      if (entries.size() < r + 1) continue;
      for (std::size_t k = 0; k < r; ++k) {
        std::swap(entries[k], entries[k + rng.uniform_index(entries.size() - k)]);
        to_test[entries[k]] = 1;
      }
    }
  }
  // original order within each split
  for (std::size_t e = 0; e < all.size(); ++e) (to_test[e] ? out.test : out.train).push_back(all[e]);
  return out;
}

NormalizedDataset normalize_means(const RatingDataset& data) {
  MeanNormalizer nz;
  Vec row_sum = Vec::Zero(data.m), col_sum = Vec::Zero(data.n);
  Vec row_cnt = Vec::Zero(data.m), col_cnt = Vec::Zero(data.n);
  double total = 0.0;
  for (const Rating& r : data.train) {
    row_sum[r.i] += r.y;
    row_cnt[r.i] += 1.0;
    col_sum[r.j] += r.y;
    col_cnt[r.j] += 1.0;
    total += r.y;
  }
  nz.global_mean = data.train.empty() ? 0.0 : total / static_cast<double>(data.train.size());
  nz.row_mean = Vec::Constant(data.m, nz.global_mean);
  nz.col_mean = Vec::Constant(data.n, nz.global_mean);
  for (Index i = 0; i < data.m; ++i)
    if (row_cnt[i] > 0) nz.row_mean[i] = row_sum[i] / row_cnt[i];
  for (Index j = 0; j < data.n; ++j)
    if (col_cnt[j] > 0) nz.col_mean[j] = col_sum[j] / col_cnt[j];

  NormalizedDataset out{data, nz};
  for (Rating& r : out.data.train) r.y -= nz.offset(r.i, r.j);
  for (Rating& r : out.data.test) r.y -= nz.offset(r.i, r.j);
  return out;
}

ErrorMetrics metrics(const Vec& predictions, const std::vector<Rating>& ratings, double rating_range) {
  require(static_cast<std::size_t>(predictions.size()) == ratings.size(), "metrics: size mismatch");
  require(rating_range > 0.0, "metrics: rating range must be positive");
  if (ratings.empty()) return {std::nan(""), std::nan("")};
  double sq = 0.0, ab = 0.0;
  for (std::size_t e = 0; e < ratings.size(); ++e) {
    const double d = predictions[static_cast<Index>(e)] - ratings[e].y;
    sq += d * d;
    ab += std::abs(d);
  }
  const double cnt = static_cast<double>(ratings.size());
  return {std::sqrt(sq / cnt), ab / cnt / rating_range};
}

// ---------------------------------------------------------------------------

PredictionStore::PredictionStore(std::shared_ptr<const kernels::BipartitePattern> train,
                                 std::shared_ptr<const kernels::BipartitePattern> test, double init)
    : train_pattern_(std::move(train)), test_pattern_(std::move(test)) {
  train_ = Vec::Constant(static_cast<Index>(train_pattern_->nnz()), init);
  test_ = Vec::Constant(static_cast<Index>(test_pattern_->nnz()), init);
}

void PredictionStore::blend(double alpha, double t, const Vec& v) {
  const Index m = train_pattern_->rows;
  const Index n = train_pattern_->cols;
  const std::span<const double> a(v.data(), static_cast<std::size_t>(m));
  const std::span<const double> b(v.data() + m, static_cast<std::size_t>(n));
  kernels::blend_rank_one(*train_pattern_, kernels::view(train_), alpha, t, a, b);
  kernels::blend_rank_one(*test_pattern_, kernels::view(test_), alpha, t, a, b);
}

void PredictionStore::recompute(const FactoredPSD& x) {
  const Index m = train_pattern_->rows;
  auto fill = [&](const kernels::BipartitePattern& p, Vec& values) {
    values.setZero();
    for (std::size_t k = 0; k < x.size(); ++k) {
      const Vec& v = x.vectors()[k];
      const double c = x.scale() * x.weights()[k];
      for (std::size_t e = 0; e < p.nnz(); ++e) values[static_cast<Index>(e)] += c * v[p.row[e]] * v[m + p.col[e]];
    }
  };
  fill(*train_pattern_, train_);
  fill(*test_pattern_, test_);
}

double closed_form_alpha(const kernels::BipartitePattern& pattern, const Vec& values, const Vec& ratings,
                         const Vec& v, double t) {
  const Index m = pattern.rows;
  double num = 0.0, den = 0.0;
  for (std::size_t e = 0; e < pattern.nnz(); ++e) {
    const auto k = static_cast<Index>(e);
    const double d = values[k] - t * v[pattern.row[e]] * v[m + pattern.col[e]];
    num += (values[k] - ratings[k]) * d;
    den += d * d;
  }
  if (den <= 0.0) return 0.0;
  return std::clamp(num / den, 0.0, 1.0);
}

// ---------------------------------------------------------------------------

namespace {

std::shared_ptr<const kernels::BipartitePattern> pattern_of(const std::vector<Rating>& split, Index m, Index n) {
  std::vector<int> rows, cols;
  rows.reserve(split.size());
  cols.reserve(split.size());
  for (const Rating& r : split) {
    rows.push_back(r.i);
    cols.push_back(r.j);
  }
  return std::make_shared<const kernels::BipartitePattern>(m, n, std::move(rows), std::move(cols));
}

Vec ratings_of(const std::vector<Rating>& split) {
  Vec y(static_cast<Index>(split.size()));
  for (std::size_t e = 0; e < split.size(); ++e) y[static_cast<Index>(e)] = split[e].y;
  return y;
}

}  // namespace

MatcompObjective::MatcompObjective(const RatingDataset& data) : m_(data.m), n_(data.n) {
  require(m_ >= 1 && n_ >= 1, "MatcompObjective: empty rating matrix");
  data.validate();
  train_ = pattern_of(data.train, m_, n_);
  test_ = pattern_of(data.test, m_, n_);
  y_train_ = ratings_of(data.train);
  y_test_ = ratings_of(data.test);
}

std::unique_ptr<SpectralState> MatcompObjective::make_state(const FactoredPSD& x0) const {
  require(x0.dim() == dim(), "MatcompObjective: dimension mismatch");
  return std::make_unique<MatcompState>(*this, x0);
}

RectObjective MatcompObjective::rect_objective() const {
  RectObjective f;
  f.m = m_;
  f.n = n_;
  auto pat = train_;
  const Vec y = y_train_;
  f.eval = [pat, y](const Mat& z) {
    double s = 0.0;
    for (std::size_t e = 0; e < pat->nnz(); ++e) {
      const double d = z(pat->row[e], pat->col[e]) - y[static_cast<Index>(e)];
      s += d * d;
    }
    return 0.5 * s;
  };
  f.grad = [pat, y](const Mat& z) -> Mat {
    Mat g = Mat::Zero(z.rows(), z.cols());
    for (std::size_t e = 0; e < pat->nnz(); ++e)
      g(pat->row[e], pat->col[e]) = z(pat->row[e], pat->col[e]) - y[static_cast<Index>(e)];
    return g;
  };
  f.hessian_bound = 1.0;
  return f;
}

MatcompState::MatcompState(const MatcompObjective& obj, const FactoredPSD& x0) : obj_(&obj), t_(x0.scale()) {
  const Vec& v = x0.vectors().front();
  require(x0.size() == 1, "MatcompState: start from a single atom");
  // one atom with weight 1: the store is a pure rank-one fill
  store_ = PredictionStore(std::make_shared<const kernels::BipartitePattern>(obj.train_pattern()),
                           std::make_shared<const kernels::BipartitePattern>(obj.test_pattern()), 0.0);
  store_.blend(1.0, t_, v);
  residual_ = store_.train() - obj.train_ratings();
}

double MatcompState::value() const { return 0.5 * kernels::dot(kernels::view(residual_), kernels::view(residual_)); }

SymmetricOperator MatcompState::gradient() const {
  const auto& pat = obj_->train_pattern();
  const Index m = obj_->m(), n = obj_->n();
  auto r = std::make_shared<const Vec>(residual_);
  SymmetricOperator op;
  op.dim = m + n;
  op.nnz = 2 * pat.nnz();
  const auto* p = &pat;
  op.apply = [p, r, m, n](const Vec& x, Vec& y) {
    kernels::bipartite_apply(*p, kernels::view(*r), {x.data(), static_cast<std::size_t>(m)},
                             {x.data() + m, static_cast<std::size_t>(n)}, {y.data(), static_cast<std::size_t>(m)},
                             {y.data() + m, static_cast<std::size_t>(n)}, 0.5);
  };
  op.frobenius = r->norm() / std::sqrt(2.0);
  Vec row_abs = Vec::Zero(m), col_abs = Vec::Zero(n);
  for (std::size_t e = 0; e < pat.nnz(); ++e) {
    const double a = std::abs((*r)[static_cast<Index>(e)]);
    row_abs[pat.row[e]] += a;
    col_abs[pat.col[e]] += a;
  }
  op.row_sum_bound = 0.5 * std::max(row_abs.maxCoeff(), col_abs.maxCoeff());
  return op;
}

std::optional<double> MatcompState::iterate_inner() const {
  // X . (1/2)[0 R; R^T 0] counts each observed entry twice
  return kernels::dot(kernels::view(store_.train()), kernels::view(residual_));
}

Vec MatcompState::candidate(const Vec& v) const {
  const auto& pat = obj_->train_pattern();
  const Index m = obj_->m();
  Vec s(static_cast<Index>(pat.nnz()));
  for (std::size_t e = 0; e < pat.nnz(); ++e) s[static_cast<Index>(e)] = t_ * v[pat.row[e]] * v[m + pat.col[e]];
  return s;
}

void MatcompState::commit(double alpha, const Vec& v) {
  store_.blend(alpha, t_, v);
  residual_ = store_.train() - obj_->train_ratings();
}

double MatcompState::value_along(double alpha, const Vec& v) const {
  const Vec r = (1.0 - alpha) * store_.train() + alpha * candidate(v) - obj_->train_ratings();
  return 0.5 * r.squaredNorm();
}

double MatcompState::slope_along(double alpha, const Vec& v) const {
  const Vec s = candidate(v);
  const Vec r = (1.0 - alpha) * store_.train() + alpha * s - obj_->train_ratings();
  return r.dot(s - store_.train());
}

std::optional<double> MatcompState::exact_line_search(const Vec& v) const {
  return closed_form_alpha(obj_->train_pattern(), store_.train(), obj_->train_ratings(), v, t_);
}

void MatcompState::apply_blended_gradient(double beta, const Vec& v, const Vec& x, Vec& y) const {
  const Index m = obj_->m(), n = obj_->n();
  const Vec r = (1.0 - beta) * store_.train() + beta * candidate(v) - obj_->train_ratings();
  kernels::bipartite_apply(obj_->train_pattern(), kernels::view(r), {x.data(), static_cast<std::size_t>(m)},
                           {x.data() + m, static_cast<std::size_t>(n)}, {y.data(), static_cast<std::size_t>(m)},
                           {y.data() + m, static_cast<std::size_t>(n)}, 0.5);
}

// ---------------------------------------------------------------------------

CompletionResult complete(const RatingDataset& data, const CompletionOptions& opt) {
  require(opt.t > 0.0, "complete: t must be positive");
  require(opt.steps >= 0, "complete: steps must be nonnegative");
  const auto t0 = std::chrono::steady_clock::now();
  const MatcompObjective obj(data);
  const Index dim = obj.dim();

  HazanOptions ho;
  ho.t = opt.t;
  ho.seed = opt.seed;
  ho.start = opt.uniform_start ? Vec(Vec::Ones(dim)) : Vec(Vec::Unit(dim, 0));
  ho.variant = opt.grad_averaging ? HazanOptions::Variant::grad_averaging
               : opt.line_search  ? HazanOptions::Variant::line_search
                                  : HazanOptions::Variant::plain;
  ho.solver.schedule = opt.line_search || opt.grad_averaging ? StepSchedule::line_search() : StepSchedule::harmonic();
  ho.solver.stop.max_iters = opt.steps;
  if (opt.fixed_power_budget) {
    // no final eigenvector: the last row only records f
    ho.solver.record_final_gap = false;
    ho.eig_policy = [opt](int k, double prev_rayleigh, EigOptions& eo) {
      eo.iterations = static_cast<int>(std::ceil(opt.power_fraction * (k + 1))) + opt.power_floor;
      eo.start = EigOptions::Start::uniform;
      // prev_rayleigh estimates lambda_min(G) < 0; the power method runs on -G
      eo.shift = std::max(0.0, -0.5 * prev_rayleigh);
      eo.shift_at_least_start_norm = true;
    };
  } else {
    ho.solver.lmo = LmoMode::approx;
    ho.solver.curvature = obj.curvature_bound(opt.t);
  }

  CompletionResult out;
  auto record = [&](int k, const HazanModel& model) {
    const auto& st = dynamic_cast<const MatcompState&>(model.state());
    StepMetrics s;
    s.k = k;
    s.f = st.value();
    s.rmse_train = metrics(st.store().train(), data.train, opt.rating_range).rmse;
    const ErrorMetrics te = metrics(st.store().test(), data.test, opt.rating_range);
    s.rmse_test = te.rmse;
    s.nmae_test = te.nmae;
    s.matvecs = model.matvecs();
    s.millis = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
    out.steps.push_back(s);
  };
  ho.on_step = record;

  HazanModel model(obj, ho);
  record(0, model);
  out.trace = run(model, ho.solver);
  out.trace.seed = opt.seed;

  const auto& st = dynamic_cast<const MatcompState&>(model.state());
  out.x = model.iterate();
  out.factors = extract_factorization(out.x, obj.m());
  out.test_predictions = st.store().test();
  out.train_metrics = metrics(st.store().train(), data.train, opt.rating_range);
  out.test_metrics = metrics(st.store().test(), data.test, opt.rating_range);
  out.matvecs = model.matvecs();
  out.millis = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace fw
