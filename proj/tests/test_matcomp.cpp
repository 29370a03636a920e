#include <doctest.h>

#include <set>
#include <sstream>

#include "fw/matcomp.hpp"
#include "fw/vector_problem.hpp"
#include "support.hpp"

using namespace fw;
using fwtest::Rand;

namespace {

RatingDataset dataset(Index m, Index n, std::vector<Rating> train, std::vector<Rating> test = {}) {
  RatingDataset d;
  d.m = m;
  d.n = n;
  d.train = std::move(train);
  d.test = std::move(test);
  return d;
}

// |omega| distinct random positions with N(0,1) ratings
RatingDataset random_dataset(Rand& rnd, Index m, Index n, std::size_t omega, std::size_t test = 0) {
  std::set<std::pair<int, int>> used;
  std::vector<Rating> all;
  while (all.size() < omega + test) {
    const int i = static_cast<int>(rnd.index(m)), j = static_cast<int>(rnd.index(n));
    if (used.insert({i, j}).second) all.push_back({i, j, rnd.normal()});
  }
  std::vector<Rating> te(all.begin() + static_cast<std::ptrdiff_t>(omega), all.end());
  all.resize(omega);
  return dataset(m, n, all, te);
}

Mat dense_operator(const SymmetricOperator& op) {
  Mat out(op.dim, op.dim);
  Vec y(op.dim);
  for (Index c = 0; c < op.dim; ++c) {
    op.apply(Vec::Unit(op.dim, c), y);
    out.col(c) = y;
  }
  return out;
}

// independent: bisection on phi'(a) = sum ((1-a) x + a s - y)(s - x), clamped to [0,1]
double bisection_alpha(const Vec& x, const Vec& s, const Vec& y) {
  auto slope = [&](double a) { return ((1.0 - a) * x + a * s - y).dot(s - x); };
  if (slope(0.0) >= 0.0) return 0.0;
  if (slope(1.0) <= 0.0) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Vec rank_one_on(const std::vector<Rating>& split, Index m, double t, const Vec& v) {
  Vec s(static_cast<Index>(split.size()));
  for (std::size_t e = 0; e < split.size(); ++e) s[static_cast<Index>(e)] = t * v[split[e].i] * v[m + split[e].j];
  return s;
}

Vec ratings(const std::vector<Rating>& split) {
  Vec y(static_cast<Index>(split.size()));
  for (std::size_t e = 0; e < split.size(); ++e) y[static_cast<Index>(e)] = split[e].y;
  return y;
}

}  // namespace

TEST_CASE("loading rating files") {
  std::istringstream tab("1\t10\t5\t881250949\n3\t10\t3\t881250950\n\n1\t20\t4\t881250951\n");
  const RatingDataset d = load_movielens(tab, MovieLensFormat::tab_100k);
  CHECK(d.m == 2);
  CHECK(d.n == 2);
  CHECK(d.user_ids == std::vector<long long>{1, 3});
  CHECK(d.item_ids == std::vector<long long>{10, 20});
  REQUIRE(d.train.size() == 3);
  CHECK(d.test.empty());
  const std::vector<std::tuple<int, int, double>> want{{0, 0, 5.0}, {1, 0, 3.0}, {0, 1, 4.0}};
  for (std::size_t e = 0; e < 3; ++e) {
    CHECK(d.train[e].i == std::get<0>(want[e]));
    CHECK(d.train[e].j == std::get<1>(want[e]));
    CHECK(d.train[e].y == std::get<2>(want[e]));
  }

  std::istringstream dat("7::2::1::978300760\r\n7::5::2::978300761\r\n");
  const RatingDataset d2 = load_movielens(dat, MovieLensFormat::dat_1m);
  CHECK(d2.m == 1);
  CHECK(d2.n == 2);
  CHECK(d2.train[1].y == 2.0);

  std::istringstream empty("");
  CHECK_THROWS_AS(load_movielens(empty, MovieLensFormat::tab_100k), DataError);
  std::istringstream bad("1 2 3 4\n1 x 3 4\n");
  try {
    load_movielens(bad, MovieLensFormat::tab_100k, "bad.data");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("bad.data:2") != std::string::npos);
  }
  std::istringstream dup("1 2 3 4\n1 2 5 6\n");
  CHECK_THROWS_AS(load_movielens(dup, MovieLensFormat::tab_100k), DataError);
  CHECK_THROWS_AS(load_movielens("/nonexistent/u.data", MovieLensFormat::tab_100k), DataError);
  CHECK(parse_movielens_format("1m") == MovieLensFormat::dat_1m);
  CHECK_THROWS_AS(parse_movielens_format("csv"), InvalidArgument);
}

TEST_CASE("train/test splits") {
  Rand rnd(1);
  const RatingDataset d = random_dataset(rnd, 12, 15, 101);
  const RatingDataset half = split_train_test(d, SplitPolicy::random_fraction(0.5, 3));
  CHECK(half.train.size() == 50);
  CHECK(half.test.size() == 51);
  half.validate();
  std::set<std::pair<int, int>> tr, te;
  for (const auto& r : half.train) tr.insert({r.i, r.j});
  for (const auto& r : half.test) te.insert({r.i, r.j});
  for (const auto& p : te) CHECK(tr.count(p) == 0);
  CHECK(tr.size() + te.size() == 101);

  const RatingDataset again = split_train_test(d, SplitPolicy::random_fraction(0.5, 3));
  for (std::size_t e = 0; e < again.test.size(); ++e) CHECK(again.test[e].i == half.test[e].i);

  const RatingDataset all = split_train_test(half, SplitPolicy::random_fraction(1.0, 0));
  CHECK(all.train.size() == 101);
  CHECK(all.test.empty());

  // users with 1, 2, 3 and 5 ratings
  std::vector<Rating> r;
  const int counts[] = {1, 2, 3, 5};
  for (int u = 0; u < 4; ++u)
    for (int j = 0; j < counts[u]; ++j) r.push_back({u, j, 1.0});
  const RatingDataset held = split_train_test(dataset(4, 5, r), SplitPolicy::per_user_holdout(2, 9));
  int per_user[4] = {0, 0, 0, 0};
  for (const auto& x : held.test) ++per_user[x.i];
  CHECK(per_user[0] == 0);
  CHECK(per_user[1] == 0);
  CHECK(per_user[2] == 2);
  CHECK(per_user[3] == 2);
  CHECK(held.size() == r.size());
  CHECK_THROWS_AS(split_train_test(d, SplitPolicy::random_fraction(1.5, 0)), InvalidArgument);
}

TEST_CASE("mean normalization") {
  std::vector<Rating> c;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) c.push_back({i, j, 3.5});
  for (const auto& r : normalize_means(dataset(3, 4, c)).data.train) CHECK(r.y == 0.0);

  // row means 4, 2.5, 2; column means 3, 2.5, 4; global 3; user 3 only in test
  const RatingDataset d =
      dataset(4, 3, {{0, 0, 5}, {0, 1, 3}, {1, 0, 1}, {1, 2, 4}, {2, 1, 2}}, {{3, 2, 5}, {2, 0, 4}});
  const NormalizedDataset nd = normalize_means(d);
  const MeanNormalizer& nz = nd.normalizer;
  CHECK(nz.global_mean == 3.0);
  CHECK(nz.row_mean[0] == 4.0);
  CHECK(nz.row_mean[1] == 2.5);
  CHECK(nz.row_mean[2] == 2.0);
  CHECK(nz.row_mean[3] == 3.0);
  CHECK(nz.col_mean[0] == 3.0);
  CHECK(nz.col_mean[1] == 2.5);
  CHECK(nz.col_mean[2] == 4.0);
  CHECK(nd.data.train[0].y == 1.5);   // 5 - (4 + 3)/2
  CHECK(nd.data.train[4].y == -0.25); // 2 - (2 + 2.5)/2
  CHECK(nd.data.test[0].y == 1.5);    // 5 - (3 + 4)/2
  CHECK(nd.data.test[1].y == 1.5);    // 4 - (2 + 3)/2
  for (std::size_t e = 0; e < d.train.size(); ++e) {
    const Rating& r = nd.data.train[e];
    CHECK(nz.denormalize(r.y, r.i, r.j) == doctest::Approx(d.train[e].y).epsilon(1e-15));
  }
}

TEST_CASE("error metrics") {
  const std::vector<Rating> r{{0, 0, 1}, {0, 1, 5}, {1, 0, 3}};
  const ErrorMetrics perfect = metrics((Vec(3) << 1, 5, 3).finished(), r);
  CHECK(perfect.rmse == 0.0);
  CHECK(perfect.nmae == 0.0);
  const ErrorMetrics off = metrics((Vec(3) << 2, 4, 4).finished(), r);
  CHECK(off.rmse == doctest::Approx(1.0));
  CHECK(off.nmae == doctest::Approx(0.25));
  CHECK(std::isnan(metrics(Vec(0), {}).rmse));
  CHECK_THROWS_AS(metrics(Vec(2), r), InvalidArgument);
}

TEST_CASE("squared loss objective") {
  SUBCASE("zero predictions") {
    std::vector<Rating> r;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 3; ++j)
        if ((i + j) % 2 == 0) r.push_back({i, j, 1.0});
    const MatcompObjective obj(dataset(4, 3, r));
    // all weight on a user coordinate: every predicted entry is zero
    const auto st = obj.make_state(FactoredPSD(Vec::Unit(7, 0), 2.0));
    CHECK(st->value() == doctest::Approx(r.size() / 2.0));
    CHECK(obj.curvature_bound(3.0) == 9.0);
  }

  SUBCASE("gradient on a 5 x 4 instance") {
    Rand rnd(2);
    const RatingDataset d = random_dataset(rnd, 5, 4, 12);
    const MatcompObjective obj(d);
    const RectObjective f = obj.rect_objective();
    for (int rep = 0; rep < 5; ++rep) {
      const Mat z = rnd.normal_mat(5, 4), dz = rnd.normal_mat(5, 4);
      CHECK(std::abs(fwtest::central_diff(f.eval, z, dz) - f.grad(z).cwiseProduct(dz).sum()) <= 1e-7);
    }
    // the state's operator is the symmetrized gradient: G . D = sum_ij R_ij D_ij
    const Vec v = rnd.unit(9);
    const double t = 2.5;
    const auto st = obj.make_state(FactoredPSD(v, t));
    const Mat x = t * v * v.transpose();
    const BlockEmbedding e{5, 4};
    CHECK(st->value() == doctest::Approx(f.eval(e.extract_z(x))));
    const Mat g = dense_operator(st->gradient());
    CHECK((g - 0.5 * e.embed_offdiag(f.grad(e.extract_z(x)))).norm() <= 1e-12);
    for (int rep = 0; rep < 5; ++rep) {
      const Mat dx = rnd.symmetric(9);
      const auto lifted = [&](const Mat& y) { return f.eval(e.extract_z(y)); };
      CHECK(std::abs(fwtest::central_diff(lifted, x, dx) - g.cwiseProduct(dx).sum()) <= 1e-7);
    }
    CHECK(*st->iterate_inner() == doctest::Approx(x.cwiseProduct(g).sum()));
  }

  SUBCASE("symmetric gradient spectrum") {
    Rand rnd(3);
    const RatingDataset d = random_dataset(rnd, 6, 5, 17);
    const MatcompObjective obj(d);
    const auto st = obj.make_state(FactoredPSD(rnd.unit(11), 4.0));
    const Mat g = dense_operator(st->gradient());
    const Vec ev = fwtest::eigenvalues(g);
    for (Index i = 0; i < 11; ++i) CHECK(ev[i] == doctest::Approx(-ev[10 - i]).epsilon(1e-12).scale(1.0));
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    for (Index i = 0; i < 11; ++i) {
      Vec flip = es.eigenvectors().col(i);
      flip.tail(5) *= -1.0;
      CHECK((g * flip + es.eigenvalues()[i] * flip).norm() <= 1e-10);
    }
  }
}

TEST_CASE("closed-form step size") {
  Rand rnd(4);
  const kernels::BipartitePattern pattern = [&] {
    const RatingDataset d = random_dataset(rnd, 10, 10, 30);
    std::vector<int> rows, cols;
    for (const auto& r : d.train) {
      rows.push_back(r.i);
      cols.push_back(r.j);
    }
    return kernels::BipartitePattern(10, 10, rows, cols);
  }();
  std::vector<Rating> split;
  for (std::size_t e = 0; e < pattern.nnz(); ++e) split.push_back({pattern.row[e], pattern.col[e], 0.0});

  // objective on the stored values for the library's bisection
  VectorObjective sq;
  Vec y;
  sq.eval = [&y](const Vec& x) { return 0.5 * (x - y).squaredNorm(); };
  sq.grad = [&y](const Vec& x) -> Vec { return x - y; };

  int interior = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const double t = rnd.uniform(0.5, 5.0);
    const Vec v = rnd.unit(20);
    const Vec x = rnd.normal_vec(30);
    y = rnd.normal_vec(30) + rnd.uniform(0.0, 1.0) * rank_one_on(split, 10, t, v);
    const double a = closed_form_alpha(pattern, x, y, v, t);
    const Vec s = rank_one_on(split, 10, t, v);
    CHECK(std::abs(a - bisection_alpha(x, s, y)) <= 1e-8);
    CHECK(std::abs(a - line_search_alpha(sq, x, s)) <= 1e-8);
    interior += a > 0.0 && a < 1.0;
  }
  CHECK(interior >= 100);

  const Vec v = rnd.unit(20);
  const Vec s = rank_one_on(split, 10, 2.0, v);
  // candidate already equals X: zero denominator
  CHECK(closed_form_alpha(pattern, s, rnd.normal_vec(30), v, 2.0) == 0.0);
  // candidate reproduces the ratings: a full step
  CHECK(closed_form_alpha(pattern, rnd.normal_vec(30), s, v, 2.0) == doctest::Approx(1.0));
}

TEST_CASE("prediction store tracks the factored iterate") {
  Rand rnd(5);
  const RatingDataset d = random_dataset(rnd, 8, 7, 25, 10);
  const MatcompObjective obj(d);
  auto tr = std::make_shared<const kernels::BipartitePattern>(obj.train_pattern());
  auto te = std::make_shared<const kernels::BipartitePattern>(obj.test_pattern());
  const double t = 3.0;
  FactoredPSD x(rnd.unit(15), t);
  PredictionStore store(tr, te, 0.0);
  store.blend(1.0, t, x.vectors().front());
  PredictionStore fresh(tr, te, 0.0);
  for (int k = 1; k <= 100; ++k) {
    const double alpha = rnd.uniform(0.0, 1.0);
    const Vec v = rnd.normal_vec(15);
    x.blend(alpha, v);
    store.blend(alpha, t, v.normalized());
    if (k % 10 == 0) {
      fresh.recompute(x);
      CHECK((store.train() - fresh.train()).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK((store.test() - fresh.test()).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("completion run invariants") {
  Rand rnd(6);
  const RatingDataset d = random_dataset(rnd, 15, 12, 90, 20);
  const MatcompObjective obj(d);
  for (const auto variant : {HazanOptions::Variant::line_search, HazanOptions::Variant::grad_averaging}) {
    HazanOptions o;
    o.t = 6.0;
    o.variant = variant;
    o.start = Vec::Ones(27);
    o.solver.schedule = StepSchedule::line_search();
    o.solver.stop.max_iters = 60;
    double prev = kInf;
    int seen = 0;
    o.on_step = [&](int k, const HazanModel& model) {
      ++seen;
      const auto& st = dynamic_cast<const MatcompState&>(model.state());
      CHECK(st.value() <= prev + 1e-12);
      prev = st.value();
      const Factorization fz = extract_factorization(model.iterate(), 15);
      CHECK(0.5 * (fz.l.squaredNorm() + fz.r.squaredNorm()) <= o.t / 2 + 1e-6);
      CHECK(model.iterate().weight_sum() == doctest::Approx(1.0).epsilon(1e-12));
      if (k % 10 == 0) {
        const Mat z = fz.l * fz.r.transpose();
        for (std::size_t e = 0; e < d.train.size(); ++e)
          CHECK(std::abs(st.store().train()[static_cast<Index>(e)] - z(d.train[e].i, d.train[e].j)) <= 1e-8);
        for (std::size_t e = 0; e < d.test.size(); ++e)
          CHECK(std::abs(st.store().test()[static_cast<Index>(e)] - z(d.test[e].i, d.test[e].j)) <= 1e-8);
      }
    };
    hazan_run(obj, o);
    CHECK(seen == 60);
  }
}

TEST_CASE("planted rank-2 matrix is recovered") {
  for (std::uint64_t seed = 7; seed < 12; ++seed) {
    Rand rnd(seed);
    // entries of unit variance
    const Mat zstar = rnd.normal_mat(20, 2) * rnd.normal_mat(2, 15) / std::sqrt(2.0);
    std::vector<Rating> all;
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 15; ++j) all.push_back({i, j, zstar(i, j)});
    CompletionOptions o;
    o.t = 2.0 * fwtest::nuclear_norm_svd(zstar);
    o.steps = 200;
    o.fixed_power_budget = false;
    const CompletionResult r = complete(dataset(20, 15, all), o);
    REQUIRE(r.steps.size() == 201);
    CHECK(r.train_metrics.rmse <= 0.05);
    CHECK(r.steps.back().rmse_train == r.train_metrics.rmse);
    CHECK(r.steps.front().rmse_train > 0.5);
    CHECK(((r.factors.l * r.factors.r.transpose()) - zstar).norm() / zstar.norm() <= 0.05);
  }
}

TEST_CASE("a vanishing radius predicts zero") {
  Rand rnd(8);
  const RatingDataset d = random_dataset(rnd, 10, 8, 40, 15);
  CompletionOptions o;
  o.t = 1e-9;
  o.steps = 5;
  const CompletionResult r = complete(d, o);
  CHECK(r.test_predictions.cwiseAbs().maxCoeff() <= 1e-9);
  const double rms = std::sqrt(ratings(d.test).squaredNorm() / d.test.size());
  CHECK(r.test_metrics.rmse == doctest::Approx(rms).epsilon(1e-8));

  // zero steps leaves the start point only
  o.t = 2.0;
  o.steps = 0;
  const CompletionResult z = complete(d, o);
  CHECK(z.steps.size() == 1);
  CHECK(z.x.size() == 1);
}
