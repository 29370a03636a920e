#pragma once

#include <chrono>
#include <cmath>
#include <concepts>
#include <functional>
#include <optional>
#include <string>

#include "fw/common.hpp"
#include "fw/trace.hpp"

namespace fw {

/// Step-size rule. All modes produce alpha in [0, 1].
struct StepSchedule {
  enum class Mode { harmonic, fixed_after, line_search };
  Mode mode = Mode::harmonic;
  int fixed_from = 0;  ///< K for fixed_after: alpha = 2/(K+2) once k >= K

  static StepSchedule harmonic() { return {}; }
  static StepSchedule fixed_after(int k) { return {Mode::fixed_after, k}; }
  static StepSchedule line_search() { return {Mode::line_search, 0}; }

  /// The predetermined step 2/(k+2) (or the frozen value after K).
  double fixed_alpha(int k) const {
    if (mode == Mode::fixed_after && k >= fixed_from) return 2.0 / (fixed_from + 2.0);
    return 2.0 / (k + 2.0);
  }
  bool searches() const { return mode == Mode::line_search; }
};

enum class LmoMode { exact, approx };

struct StopRule {
  int max_iters = 1000;
  std::optional<double> gap_tolerance;  ///< stop once gap + tolerance <= this
};

struct SolverOptions {
  StepSchedule schedule;
  StopRule stop;
  LmoMode lmo = LmoMode::exact;
  std::optional<double> curvature;  ///< C_f; required for approx mode
  bool record_final_gap = true;     ///< evaluate the LMO once more after the last step
};

/// Result of one linear-minimization call at the current iterate.
struct Direction {
  double gap = 0.0;        ///< <x - s, grad f(x)>
  double tolerance = 0.0;  ///< additive slack of the LMO (gap + tolerance >= true gap)
  std::string atom;
};

/// Problem adapter consumed by the generic solver. A model owns the iterate,
/// knows its objective and domain, and remembers the last LMO answer.
template <class M>
concept FrankWolfeModel = requires(M m, const M cm, double a, int k) {
  { cm.value() } -> std::convertible_to<double>;
  { m.direction(a) } -> std::same_as<Direction>;  ///< a = LMO accuracy eps'
  { m.line_search(k) } -> std::convertible_to<double>;
  { m.step(a) };
  { cm.matvecs() } -> std::convertible_to<std::size_t>;
  typename M::Snapshot;
  { cm.snapshot() } -> std::same_as<typename M::Snapshot>;
  { m.restore(cm.snapshot()) };
};

/// 1-D minimization of a convex phi on [0, 1] from its derivative. Returns 0
/// when phi'(0) >= 0, 1 when phi'(1) <= 0, otherwise bisects until
/// |phi'| <= 1e-10 or 60 halvings.
double bisect_derivative(const std::function<double(double)>& slope);

/// Line search guarded against the fixed grid {0, 2/(k+2), 1}: returns the
/// bisection result unless one of the grid points is strictly better.
double guarded_line_search(const std::function<double(double)>& phi,
                           const std::function<double(double)>& slope, int k);

/// C_f <= 1/2 diam(D)^2 sup lambda_max(Hessian).
inline double curvature_from_hessian(double sup_hessian_eig, double diameter_sq) {
  require(sup_hessian_eig >= 0.0 && diameter_sq >= 0.0, "curvature_from_hessian: negative input");
  return 0.5 * diameter_sq * sup_hessian_eig;
}

namespace detail {
inline long long elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
}
inline void check_row(const TraceRow& row) {
  if (!std::isfinite(row.f)) throw NumericalError("objective value is not finite at k=" + std::to_string(row.k));
  if (!std::isfinite(row.gap)) throw NumericalError("duality gap is not finite at k=" + std::to_string(row.k));
}
}  // namespace detail

/// Generic Frank-Wolfe loop: at iterate k compute the (approximate) linear
/// minimizer s, record (f, gap), then move x <- x + alpha (s - x).
template <FrankWolfeModel Model>
RunTrace run(Model& model, const SolverOptions& opt) {
  require(opt.lmo == LmoMode::exact || opt.curvature.has_value(),
          "approximate LMO needs a curvature bound");
  const auto t0 = std::chrono::steady_clock::now();
  RunTrace trace;
  for (int k = 0;; ++k) {
    const double fixed = opt.schedule.fixed_alpha(k);
    const double eps_prime = opt.lmo == LmoMode::approx ? fixed * *opt.curvature : 0.0;
    const bool last = k >= opt.stop.max_iters;
    if (last && !opt.record_final_gap) {
      TraceRow row{k, model.value(), std::nan(""), kInf, 0.0, "", model.matvecs(), detail::elapsed_ms(t0)};
      if (!std::isfinite(row.f)) throw NumericalError("objective value is not finite at k=" + std::to_string(k));
      trace.rows.push_back(std::move(row));
      break;
    }
    const double f = model.value();
    Direction dir = model.direction(eps_prime);
    TraceRow row{k, f, dir.gap, dir.tolerance, 0.0, std::move(dir.atom), model.matvecs(), detail::elapsed_ms(t0)};
    detail::check_row(row);
    const bool converged = opt.stop.gap_tolerance && row.gap + row.tolerance <= *opt.stop.gap_tolerance;
    if (last || converged) {
      trace.rows.push_back(std::move(row));
      break;
    }
    const double alpha = opt.schedule.searches() ? model.line_search(k) : fixed;
    row.alpha = alpha;
    trace.rows.push_back(std::move(row));
    model.step(alpha);
  }
  return trace;
}

template <class Snapshot>
struct CertifiedResult {
  Snapshot best;
  int best_k = 0;
  double certified_gap = kInf;  ///< gap + tolerance of `best`
  bool certified = false;
  RunTrace trace;
};

/// Primal-dual certified run: K = ceil(4 C / eps) harmonic steps (8 C / eps
/// for the approximate LMO), then K + 1 steps with alpha fixed to 2/(K+2).
/// Returns the iterate with the smallest measured gap + tolerance; stops as
/// soon as that value is <= eps.
template <FrankWolfeModel Model>
CertifiedResult<typename Model::Snapshot> certified_run(Model& model, double eps, double curvature,
                                                        LmoMode lmo = LmoMode::exact) {
  require(eps > 0.0, "certified_run: eps must be positive");
  require(curvature >= 0.0, "certified_run: curvature must be nonnegative");
  const double factor = lmo == LmoMode::exact ? 4.0 : 8.0;
  const int K = std::max(1, static_cast<int>(std::ceil(factor * curvature / eps)));
  const StepSchedule schedule = StepSchedule::fixed_after(K);
  const auto t0 = std::chrono::steady_clock::now();

  CertifiedResult<typename Model::Snapshot> out{model.snapshot(), 0, kInf, false, {}};
  for (int k = 0; k <= 2 * K + 1; ++k) {
    const double fixed = schedule.fixed_alpha(k);
    const double eps_prime = lmo == LmoMode::approx ? fixed * curvature : 0.0;
    const double f = model.value();
    Direction dir = model.direction(eps_prime);
    TraceRow row{k, f, dir.gap, dir.tolerance, 0.0, std::move(dir.atom), model.matvecs(), detail::elapsed_ms(t0)};
    detail::check_row(row);
    const double cert = row.gap + row.tolerance;
    if (cert < out.certified_gap) {
      out.certified_gap = cert;
      out.best_k = k;
      out.best = model.snapshot();
    }
    if (cert <= eps || k == 2 * K + 1) {
      out.trace.rows.push_back(std::move(row));
      break;
    }
    row.alpha = fixed;
    out.trace.rows.push_back(std::move(row));
    model.step(fixed);
  }
  out.certified = out.certified_gap <= eps;
  model.restore(out.best);
  return out;
}

}  // namespace fw
