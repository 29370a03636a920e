#include <doctest.h>

#include "fw/eigen_solvers.hpp"
#include "support.hpp"

using namespace fw;
using fwtest::Rand;

namespace {

Mat diag(std::initializer_list<double> d) {
  Vec v(static_cast<Index>(d.size()));
  Index i = 0;
  for (double x : d) v[i++] = x;
  return v.asDiagonal();
}

}  // namespace

TEST_CASE("largest eigenvector of small matrices") {
  CounterRng rng(1);
  const auto m = SymmetricOperator::from_dense(diag({2, 1}));
  const EigResult r = approx_largest_ev(m, 0.1, spectral_range_bound(m), rng);
  CHECK(r.rayleigh >= 1.9);
  CHECK(std::abs(r.v[0]) >= 0.95);
  CHECK(r.v.norm() == doctest::Approx(1.0));

  const auto id = SymmetricOperator::from_dense(Mat::Identity(5, 5));
  CHECK(approx_largest_ev(id, 0.1, spectral_range_bound(id), rng).rayleigh == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("smallest eigenvector of small matrices") {
  CounterRng rng(2);
  const auto m = SymmetricOperator::from_dense(diag({2, 1}));
  const EigResult r = approx_smallest_ev(m, 0.1, spectral_range_bound(m), rng);
  CHECK(r.rayleigh <= 1.1);
  CHECK(std::abs(r.v[1]) >= 0.95);
  const auto zero = SymmetricOperator::from_dense(Mat::Zero(4, 4));
  CHECK(approx_smallest_ev(zero, 0.1, spectral_range_bound(zero), rng).rayleigh == 0.0);
}

TEST_CASE("power method meets its accuracy in at least 95% of trials") {
  Rand rnd(3);
  for (const bool largest : {true, false}) {
    const Index n = largest ? 100 : 50;
    int ok = 0;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
      const Mat a = rnd.symmetric(n);
      const auto op = SymmetricOperator::from_dense(a);
      const double eps = 0.05 * spectral_range_bound(op);
      CounterRng rng(trial);
      if (largest) {
        const EigResult r = approx_largest_ev(op, eps, spectral_range_bound(op), rng);
        ok += r.rayleigh >= fwtest::lambda_max(a) - eps;
      } else {
        const EigResult r = approx_smallest_ev(op, eps, spectral_range_bound(op), rng);
        ok += r.rayleigh <= fwtest::lambda_min(a) + eps;
      }
    }
    CHECK(ok >= 95);
  }
}

TEST_CASE("lanczos agrees with the dense spectrum") {
  Rand rnd(4);
  EigOptions opt;
  opt.method = EigOptions::Method::lanczos;
  for (int rep = 0; rep < 10; ++rep) {
    const Mat a = rnd.symmetric(60);
    const auto op = SymmetricOperator::from_dense(a);
    CounterRng rng(rep);
    const EigResult hi = approx_largest_ev(op, 1e-6, spectral_range_bound(op), rng, opt);
    const EigResult lo = approx_smallest_ev(op, 1e-6, spectral_range_bound(op), rng, opt);
    CHECK(hi.rayleigh == doctest::Approx(fwtest::lambda_max(a)).epsilon(1e-9));
    CHECK(lo.rayleigh == doctest::Approx(fwtest::lambda_min(a)).epsilon(1e-9));
  }
}

TEST_CASE("spectral range bound") {
  const Mat d = diag({2, 1});
  const double b = spectral_range_bound(d);
  CHECK(b >= 1.0);
  CHECK(b <= 2.0 * std::sqrt(5.0));
  CHECK(spectral_range_bound(Mat::Zero(3, 3)) == 0.0);
  Rand rnd(5);
  for (int rep = 0; rep < 20; ++rep) {
    Mat a = rnd.symmetric(20);
    a.diagonal() += Vec::Constant(20, 30.0);  // diagonally dominant
    const Vec ev = fwtest::eigenvalues(a);
    CHECK(spectral_range_bound(a) >= ev[19] - ev[0]);
    CHECK(spectral_range_bound(SymmetricOperator::from_dense(a)) == spectral_range_bound(a));
  }
  SymmetricOperator bare;
  bare.dim = 3;
  bare.apply = [](const Vec& x, Vec& y) { y = x; };
  CHECK_THROWS_AS(spectral_range_bound(bare), InvalidArgument);
  bare.row_sum_bound = 1.0;
  CHECK(spectral_range_bound(bare) == 2.0);
}

TEST_CASE("dense eigen oracle") {
  const DenseEig d = dense_eig_oracle(diag({1, 3, 2}));
  CHECK(d.values == (Vec(3) << 3, 2, 1).finished());
  const DenseEig s = dense_eig_oracle((Mat(2, 2) << 0, 1, 1, 0).finished());
  CHECK(s.values[0] == doctest::Approx(1.0));
  CHECK(s.values[1] == doctest::Approx(-1.0));
  Rand rnd(6);
  const Mat a = rnd.symmetric(50);
  const DenseEig e = dense_eig_oracle(a);
  CHECK((e.vectors * e.values.asDiagonal() * e.vectors.transpose() - a).norm() <= 1e-9);
  CHECK((e.vectors.transpose() * e.vectors - Mat::Identity(50, 50)).norm() <= 1e-9);
  const Vec ref = fwtest::eigenvalues(a).reverse();
  CHECK((e.values - ref).cwiseAbs().maxCoeff() <= 1e-9);
  for (Index i = 1; i < 50; ++i) CHECK(e.values[i - 1] >= e.values[i]);
  CHECK_THROWS_AS(dense_eig_oracle(Mat::Zero(501, 501)), InvalidArgument);
}

TEST_CASE("shifting the operator shifts the Rayleigh quotient") {
  Rand rnd(7);
  const Mat a = rnd.symmetric(30);
  for (double c : {-5.0, 0.5, 12.0}) {
    EigOptions o1, o2;
    o1.iterations = o2.iterations = 40;
    o1.shift = 8.0;
    o2.shift = 8.0 - c;  // same shifted operator
    CounterRng r1(3), r2(3);
    const EigResult x = approx_largest_ev(SymmetricOperator::from_dense(a), 0.1, 1.0, r1, o1);
    const Mat b = a + c * Mat::Identity(30, 30);
    const EigResult y = approx_largest_ev(SymmetricOperator::from_dense(b), 0.1, 1.0, r2, o2);
    CHECK(std::abs(std::abs(x.v.dot(y.v)) - 1.0) <= 1e-9);
    CHECK(std::abs(y.rayleigh - (x.rayleigh + c)) <= 1e-9);
  }
}

TEST_CASE("power iterations improve monotonically on a PSD matrix") {
  Rand rnd(8);
  const Mat g = rnd.normal_mat(25, 25);
  const auto op = SymmetricOperator::from_dense(g * g.transpose());
  double prev = -kInf;
  for (int k = 1; k <= 40; ++k) {
    EigOptions o;
    o.iterations = k;
    o.shift = 0.0;
    CounterRng rng(5);
    const double r = approx_largest_ev(op, 0.1, 1.0, rng, o).rayleigh;
    CHECK(r >= prev - 1e-12);
    prev = r;
  }
  // doubling the budget never hurts
  for (int k = 1; k <= 64; k *= 2) {
    EigOptions o, o2;
    o.iterations = k;
    o2.iterations = 2 * k;
    CounterRng a(6), b(6);
    CHECK(approx_largest_ev(op, 0.1, spectral_range_bound(op), b, o2).rayleigh >=
          approx_largest_ev(op, 0.1, spectral_range_bound(op), a, o).rayleigh - 1e-12);
  }
}

TEST_CASE("iteration count and argument checks") {
  CHECK(power_iteration_count(100, 0.1, 1.0) == static_cast<int>(std::ceil(8.0 * std::log(100.0) / 0.1)));
  CHECK(power_iteration_count(1, 0.1, 1.0) == 1);
  CHECK(power_iteration_count(10, 0.1, 0.0) == 1);
  CHECK_THROWS_AS(power_iteration_count(10, 0.0, 1.0), InvalidArgument);
  CounterRng rng(0);
  const auto op = SymmetricOperator::from_dense(Mat::Identity(3, 3));
  CHECK_THROWS_AS(approx_largest_ev(op, 0.0, 1.0, rng), InvalidArgument);
  EigOptions given;
  given.start = EigOptions::Start::given;
  given.start_vector = Vec::Zero(3);
  CHECK_THROWS_AS(approx_largest_ev(op, 0.1, 1.0, rng, given), InvalidArgument);
  SymmetricOperator bad = op;
  bad.apply = [](const Vec& x, Vec& y) { y = x * std::nan(""); };
  CHECK_THROWS_AS(approx_largest_ev(bad, 0.1, 1.0, rng), NumericalError);
}

TEST_CASE("matvec count includes the final Rayleigh product") {
  EigOptions o;
  o.iterations = 7;
  CounterRng rng(0);
  const EigResult r = approx_largest_ev(SymmetricOperator::from_dense(diag({3, 1, 2})), 0.1, 1.0, rng, o);
  CHECK(r.matvecs == 8);
  CHECK(r.iterations == 7);
}
