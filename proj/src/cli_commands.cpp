#include "fw/cli_commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fw/matcomp.hpp"
#include "fw/sdp_feasibility.hpp"
#include "fw/spectahedron.hpp"
#include "fw/vector_problem.hpp"

namespace fw::cli {

using nlohmann::json;

namespace {

// ---- schema helpers --------------------------------------------------------

void expect_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  expect_object(j, where);
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  return j.at(key);
}

double get_number(const json& j, const char* key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return v.get<double>();
}

double number_or(const json& j, const char* key, double fallback, const std::string& where) {
  return j.contains(key) ? get_number(j, key, where) : fallback;
}

long long integer(const json& j, const char* key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  return v.get<long long>();
}

std::string string_of(const json& j, const char* key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

Vec json_vector(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty array of numbers");
  Vec v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(where + ": expected numbers");
    v[static_cast<Index>(i)] = j[i].get<double>();
  }
  return v;
}

Mat json_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty array of rows");
  const Vec first = json_vector(j[0], where);
  Mat m(static_cast<Index>(j.size()), first.size());
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Vec row = json_vector(j[r], where);
    if (row.size() != m.cols()) throw ConfigError(where + ": rows have different lengths");
    m.row(static_cast<Index>(r)) = row.transpose();
  }
  return m;
}

json json_of(const Vec& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

/// NaN and inf are not JSON numbers.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

/// Quadratic file: n, then the n x n matrix Q row by row, then c.
std::pair<Mat, Vec> read_quadratic_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open quadratic file: " + path);
  long long n = 0;
  if (!(in >> n) || n < 1) throw DataError(path + ": expected the dimension first");
  Mat q(n, n);
  Vec c(n);
  for (Index i = 0; i < n * n; ++i)
    if (!(in >> q(i / n, i % n))) throw DataError(path + ": Q needs " + std::to_string(n * n) + " numbers");
  for (Index i = 0; i < n; ++i)
    if (!(in >> c[i])) throw DataError(path + ": c needs " + std::to_string(n) + " numbers");
  std::string rest;
  if (in >> rest) throw DataError(path + ": trailing text '" + rest + "'");
  if (!q.isApprox(q.transpose())) throw DataError(path + ": Q is not symmetric");
  return {q, c};
}

StepSchedule parse_schedule(const json& cfg) {
  if (!cfg.contains("schedule")) return StepSchedule::harmonic();
  const json& s = cfg.at("schedule");
  if (s.is_string()) {
    if (s == "harmonic") return StepSchedule::harmonic();
    if (s == "line_search") return StepSchedule::line_search();
    throw ConfigError("schedule: expected harmonic, line_search or {\"fixed_after\": K}");
  }
  check_keys(s, {"fixed_after"}, "schedule");
  const long long k = integer(s, "fixed_after", "schedule");
  if (k < 0) throw ConfigError("schedule.fixed_after: must be nonnegative");
  return StepSchedule::fixed_after(static_cast<int>(k));
}

struct OutputSpec {
  std::string trace;
  std::string summary;
  bool timing = false;
};

OutputSpec parse_output(const json& cfg) {
  OutputSpec o;
  if (!cfg.contains("output")) return o;
  const json& j = cfg.at("output");
  check_keys(j, {"trace", "summary", "timing"}, "output");
  if (j.contains("trace")) o.trace = string_of(j, "trace", "output");
  if (j.contains("summary")) o.summary = string_of(j, "summary", "output");
  if (j.contains("timing")) {
    if (!j.at("timing").is_boolean()) throw ConfigError("output.timing: expected a boolean");
    o.timing = j.at("timing").get<bool>();
  }
  return o;
}

void emit(const json& summary, const std::string& path, std::ostream& out) {
  out << summary.dump(2) << "\n";
  if (path.empty()) return;
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path);
  f << summary.dump(2) << "\n";
}

void write_trace(const RunTrace& trace, const std::string& path, bool timing) {
  if (!path.empty()) trace.write_csv(path, timing);
}

// ---- solve -----------------------------------------------------------------

struct VectorSetup {
  VectorObjective objective;
  std::unique_ptr<VectorDomain> domain;
  Mat hessian;  ///< constant Hessian of the quadratic
};

VectorSetup vector_setup(const json& obj, const json& cfg) {
  const std::string type = string_of(obj, "type", "objective");
  VectorSetup s;
  std::string dom_type = "simplex";
  double radius = 1.0;
  if (cfg.contains("domain")) {
    const json& d = cfg.at("domain");
    check_keys(d, {"type", "radius"}, "domain");
    dom_type = string_of(d, "type", "domain");
    radius = number_or(d, "radius", 1.0, "domain");
  }

  Index n = 0;
  if (type == "squared_norm") {
    check_keys(obj, {"type", "n"}, "objective");
    n = integer(obj, "n", "objective");
    s.objective = squared_norm_objective();
    if (n >= 1) s.hessian = 2.0 * Mat::Identity(n, n);
  } else if (type == "shifted_squared_norm") {
    check_keys(obj, {"type", "r"}, "objective");
    const Vec r = json_vector(need(obj, "r", "objective"), "objective.r");
    n = r.size();
    s.objective = shifted_squared_norm_objective(r);
    s.hessian = 2.0 * Mat::Identity(n, n);
  } else if (type == "quadratic" || type == "quadratic_file") {
    Mat q;
    Vec c;
    if (type == "quadratic") {
      check_keys(obj, {"type", "Q", "c"}, "objective");
      q = json_matrix(need(obj, "Q", "objective"), "objective.Q");
      c = json_vector(need(obj, "c", "objective"), "objective.c");
      if (q.rows() != q.cols() || q.rows() != c.size()) throw ConfigError("objective: Q and c shapes differ");
      if (!q.isApprox(q.transpose())) throw ConfigError("objective.Q: not symmetric");
    } else {
      check_keys(obj, {"type", "path"}, "objective");
      std::tie(q, c) = read_quadratic_file(string_of(obj, "path", "objective"));
    }
    n = q.rows();
    s.objective = quadratic_objective(q, c);
    s.hessian = q;
  } else if (type == "least_squares" || type == "lasso") {
    if (type == "lasso")
      check_keys(obj, {"type", "A", "b", "t"}, "objective");
    else
      check_keys(obj, {"type", "A", "b"}, "objective");
    Mat a = json_matrix(need(obj, "A", "objective"), "objective.A");
    const Vec b = json_vector(need(obj, "b", "objective"), "objective.b");
    if (a.rows() != b.size()) throw ConfigError("objective: A and b shapes differ");
    if (type == "lasso") {
      // min ||t A xhat - b||^2 over the unit l1 ball
      const double t = get_number(obj, "t", "objective");
      if (!(t > 0.0)) throw ConfigError("objective.t: must be positive");
      a *= t;
      if (cfg.contains("domain") && (dom_type != "l1" && dom_type != "l1ball"))
        throw ConfigError("lasso: domain must be l1");
      dom_type = "l1";
      radius = 1.0;
    }
    n = a.cols();
    s.objective = least_squares_objective(a, b);
    s.hessian = 2.0 * a.transpose() * a;
  } else {
    throw ConfigError("objective.type: unknown '" + type + "'");
  }
  if (n < 1) throw ConfigError("objective: dimension must be positive");
  if (!(radius > 0.0)) throw ConfigError("domain.radius: must be positive");
  try {
    s.domain = make_vector_domain(dom_type, n, radius);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("domain: ") + e.what());
  }
  s.objective.curvature_bound = curvature_from_hessian(hessian_lambda_max(s.hessian), s.domain->diameter_sq());
  return s;
}

int solve_vector(const json& cfg, std::ostream& out) {
  const VectorSetup s = vector_setup(cfg.at("objective"), cfg);
  const OutputSpec o = parse_output(cfg);
  const VectorAtom start = default_start(*s.domain);
  json summary;
  int code = kOk;
  Vec x;
  RunTrace trace;
  if (cfg.contains("eps")) {
    const double eps = get_number(cfg, "eps", "config");
    if (!(eps > 0.0)) throw ConfigError("eps: must be positive");
    auto r = gap_certified_run(s.objective, *s.domain, start, eps);
    x = r.x;
    trace = std::move(r.trace);
    summary["certified"] = r.certified;
    summary["certified_gap"] = num(r.certified_gap);
    summary["best_k"] = r.best_k;
    code = r.certified ? kOk : kUncertified;
  } else {
    SolverOptions so;
    so.schedule = parse_schedule(cfg);
    so.stop.max_iters = static_cast<int>(cfg.contains("max_iters") ? integer(cfg, "max_iters", "config") : 1000);
    if (so.stop.max_iters < 0) throw ConfigError("max_iters: must be nonnegative");
    auto r = fw_run(s.objective, *s.domain, start, so);
    x = r.x;
    trace = std::move(r.trace);
    summary["certified"] = false;
  }
  summary["domain"] = s.domain->name();
  summary["f"] = num(s.objective.eval(x));
  summary["gap"] = num(s.domain->gap(x, s.objective.grad(x)));
  summary["iterations"] = trace.back().k;
  summary["curvature"] = num(*s.objective.curvature_bound);
  summary["sparsity"] = cardinality(x);
  summary["x"] = json_of(x);
  write_trace(trace, o.trace, o.timing);
  emit(summary, o.summary, out);
  return code;
}

int solve_spectahedron(const json& cfg, std::ostream& out) {
  const json& obj = cfg.at("objective");
  const std::string type = string_of(obj, "type", "objective");
  double t = 1.0;
  if (cfg.contains("domain")) {
    check_keys(cfg.at("domain"), {"type", "t"}, "domain");
    t = number_or(cfg.at("domain"), "t", 1.0, "domain");
    if (!(t > 0.0)) throw ConfigError("domain.t: must be positive");
  }
  DenseMatrixObjective f;
  if (type == "frobenius_sq") {
    check_keys(obj, {"type", "n"}, "objective");
    const long long n = integer(obj, "n", "objective");
    if (n < 1) throw ConfigError("objective.n: must be positive");
    f = frobenius_sq_objective(n);
  } else if (type == "frobenius_dist") {
    check_keys(obj, {"type", "target"}, "objective");
    const Mat target = json_matrix(need(obj, "target", "objective"), "objective.target");
    if (target.rows() != target.cols()) throw ConfigError("objective.target: must be square");
    f = frobenius_dist_objective(target);
  } else if (type == "linear") {
    check_keys(obj, {"type", "A"}, "objective");
    const Mat a = json_matrix(need(obj, "A", "objective"), "objective.A");
    if (a.rows() != a.cols()) throw ConfigError("objective.A: must be square");
    f = matrix_linear_objective(a);
  } else {
    throw ConfigError("objective.type: '" + type + "' is not available on the spectahedron");
  }
  const DenseSpectralObjective objective(f);
  const OutputSpec o = parse_output(cfg);
  const auto seed = static_cast<std::uint64_t>(cfg.contains("seed") ? integer(cfg, "seed", "config") : 0);
  json summary;
  int code = kOk;
  HazanResult r;
  if (cfg.contains("eps")) {
    const double eps = get_number(cfg, "eps", "config");
    if (!(eps > 0.0)) throw ConfigError("eps: must be positive");
    r = hazan_certified_run(objective, t, eps, seed);
    summary["certified"] = r.certified;
    summary["certified_gap"] = num(r.certified_gap);
    code = r.certified ? kOk : kUncertified;
  } else {
    HazanOptions ho;
    ho.t = t;
    ho.seed = seed;
    ho.solver.schedule = parse_schedule(cfg);
    ho.solver.stop.max_iters = static_cast<int>(cfg.contains("max_iters") ? integer(cfg, "max_iters", "config") : 100);
    if (ho.solver.stop.max_iters < 0) throw ConfigError("max_iters: must be nonnegative");
    if (ho.solver.schedule.searches()) ho.variant = HazanOptions::Variant::line_search;
    r = hazan_run(objective, ho);
    summary["certified"] = false;
  }
  const Mat x = r.x.to_dense();
  summary["domain"] = "spectahedron";
  summary["f"] = num(f.eval(x));
  summary["gap"] = num(r.trace.back().gap);
  summary["iterations"] = r.trace.back().k;
  summary["rank"] = r.x.size();
  summary["curvature"] = num(objective.curvature_bound(t).value_or(std::nan("")));
  write_trace(r.trace, o.trace, o.timing);
  emit(summary, o.summary, out);
  return code;
}

CompleteArgs complete_args_from(const json& obj, const json& cfg) {
  check_keys(obj, {"type", "path", "format", "t", "steps", "line_search", "grad_avg", "split", "preset",
                   "accuracy_driven"},
             "objective");
  CompleteArgs a;
  a.data = string_of(obj, "path", "objective");
  if (obj.contains("format")) a.format = string_of(obj, "format", "objective");
  a.t = number_or(obj, "t", a.t, "objective");
  if (obj.contains("steps")) a.steps = static_cast<int>(integer(obj, "steps", "objective"));
  for (auto [key, field] : {std::pair{"line_search", &a.line_search}, std::pair{"grad_avg", &a.grad_avg},
                            std::pair{"accuracy_driven", &a.accuracy_driven}}) {
    if (!obj.contains(key)) continue;
    if (!obj.at(key).is_boolean()) throw ConfigError(std::string("objective.") + key + ": expected a boolean");
    *field = obj.at(key).get<bool>();
  }
  if (obj.contains("split")) {
    const json& s = obj.at("split");
    a.split = s.is_string() ? s.get<std::string>() : s.is_number() ? format_double(s.get<double>()) : "";
    if (a.split.empty()) throw ConfigError("objective.split: expected a fraction or \"holdout:r\"");
  }
  if (obj.contains("preset")) a.preset = string_of(obj, "preset", "objective");
  if (cfg.contains("seed")) a.seed = static_cast<std::uint64_t>(integer(cfg, "seed", "config"));
  const OutputSpec o = parse_output(cfg);
  a.trace_path = o.trace;
  a.metrics_path = o.summary;
  a.timing = o.timing;
  return a;
}

SplitPolicy parse_split(const std::string& s, std::uint64_t seed) {
  if (s.rfind("holdout:", 0) == 0) {
    int r = 0;
    try {
      std::size_t used = 0;
      r = std::stoi(s.substr(8), &used);
      if (used != s.size() - 8) r = 0;
    } catch (const std::exception&) {
      r = 0;
    }
    if (r < 1) throw ConfigError("split: bad holdout count in '" + s + "'");
    return SplitPolicy::per_user_holdout(r, seed);
  }
  double rho = -1.0;
  try {
    std::size_t used = 0;
    rho = std::stod(s, &used);
    if (used != s.size()) rho = -1.0;
  } catch (const std::exception&) {
    rho = -1.0;
  }
  if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("split: expected a fraction in [0,1] or holdout:r, got '" + s + "'");
  return SplitPolicy::random_fraction(rho, seed);
}

struct PreparedRatings {
  RatingDataset data;  ///< what the solver sees (normalized for the means preset)
  RatingDataset split;  ///< original ratings
  MeanNormalizer normalizer;  ///< always computed, used for the baseline
};

PreparedRatings prepare_ratings(const CompleteArgs& a) {
  MovieLensFormat fmt{};
  try {
    fmt = parse_movielens_format(a.format);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (a.preset != "asis" && a.preset != "means") throw ConfigError("preset: expected asis or means");
  const SplitPolicy policy = parse_split(a.split, a.seed);
  const RatingDataset raw = load_movielens(a.data, fmt);
  PreparedRatings p;
  p.split = split_train_test(raw, policy);
  NormalizedDataset nd = normalize_means(p.split);
  p.normalizer = std::move(nd.normalizer);
  p.data = a.preset == "means" ? std::move(nd.data) : p.split;
  return p;
}

CompletionOptions completion_options(const CompleteArgs& a) {
  if (!(a.t > 0.0)) throw ConfigError("t: must be positive");
  if (a.steps < 0) throw ConfigError("steps: must be nonnegative");
  CompletionOptions o;
  o.t = a.t;
  o.steps = a.steps;
  o.line_search = a.line_search;
  o.grad_averaging = a.grad_avg;
  o.fixed_power_budget = !a.accuracy_driven;
  o.seed = a.seed;
  return o;
}

json metrics_json(const ErrorMetrics& m) { return {{"rmse", num(m.rmse)}, {"nmae", num(m.nmae)}}; }

int solve_matcomp(const json& cfg, std::ostream& out) {
  return cmd_complete(complete_args_from(cfg.at("objective"), cfg), out);
}

int solve_sdpfeas(const json& cfg, std::ostream& out) {
  const json& obj = cfg.at("objective");
  check_keys(obj, {"type", "path", "eps", "max_iters"}, "objective");
  SdpfeasArgs a;
  a.problem = string_of(obj, "path", "objective");
  a.eps = number_or(obj, "eps", a.eps, "objective");
  if (obj.contains("max_iters")) a.max_iters = static_cast<int>(integer(obj, "max_iters", "objective"));
  if (cfg.contains("seed")) a.seed = static_cast<std::uint64_t>(integer(cfg, "seed", "config"));
  const OutputSpec o = parse_output(cfg);
  a.trace_path = o.trace;
  a.summary_path = o.summary;
  a.timing = o.timing;
  return cmd_sdpfeas(a, out);
}

// ---- bench -----------------------------------------------------------------

std::vector<double> number_list(const json& cfg, const char* key, const std::string& where) {
  const json& v = need(cfg, key, where);
  if (!v.is_array()) throw ConfigError(where + "." + key + ": expected an array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(where + "." + key + ": expected numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

void bench_t_sweep(const json& cfg, std::ostream& csv) {
  check_keys(cfg, {"kind", "data", "format", "t", "steps", "split", "preset", "line_search", "seed"}, "bench");
  const std::vector<double> ts = number_list(cfg, "t", "bench");
  csv << "t,rmse_train,rmse_test,nmae_test,matvecs\n";
  if (ts.empty()) return;
  CompleteArgs a;
  a.data = string_of(cfg, "data", "bench");
  if (cfg.contains("format")) a.format = string_of(cfg, "format", "bench");
  if (cfg.contains("steps")) a.steps = static_cast<int>(integer(cfg, "steps", "bench"));
  if (cfg.contains("split")) a.split = string_of(cfg, "split", "bench");
  if (cfg.contains("preset")) a.preset = string_of(cfg, "preset", "bench");
  if (cfg.contains("line_search")) a.line_search = need(cfg, "line_search", "bench").get<bool>();
  if (cfg.contains("seed")) a.seed = static_cast<std::uint64_t>(integer(cfg, "seed", "bench"));
  for (double t : ts)
    if (!(t > 0.0)) throw ConfigError("bench.t: values must be positive");
  const PreparedRatings p = prepare_ratings(a);
  const CompletionOptions base = completion_options(a);

  std::vector<CompletionResult> results(ts.size());
  const int count = static_cast<int>(ts.size());
#if defined(FW_HAVE_OPENMP)
#pragma omp parallel for schedule(dynamic)
#endif
  for (int i = 0; i < count; ++i) {
    CompletionOptions o = base;
    o.t = ts[static_cast<std::size_t>(i)];
    results[static_cast<std::size_t>(i)] = complete(p.data, o);
  }
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto& r = results[i];
    csv << format_double(ts[i]) << "," << format_double(r.train_metrics.rmse) << ","
        << format_double(r.test_metrics.rmse) << "," << format_double(r.test_metrics.nmae) << "," << r.matvecs << "\n";
  }
}

void bench_k_sweep(const json& cfg, std::ostream& csv) {
  check_keys(cfg, {"kind", "n", "max_iters"}, "bench");
  const std::vector<double> ns = number_list(cfg, "n", "bench");
  const long long iters = cfg.contains("max_iters") ? integer(cfg, "max_iters", "bench") : 100;
  if (iters < 0) throw ConfigError("bench.max_iters: must be nonnegative");
  csv << "n,k,primal_error,gap,bound_exact,bound_approx\n";
  for (double n : ns)
    if (!(n >= 1.0) || n != std::floor(n)) throw ConfigError("bench.n: values must be positive integers");

  // ||x||^2 on the simplex: optimum 1/n, C_f = 2
  std::vector<RunTrace> traces(ns.size());
  const int count = static_cast<int>(ns.size());
#if defined(FW_HAVE_OPENMP)
#pragma omp parallel for schedule(dynamic)
#endif
  for (int i = 0; i < count; ++i) {
    const SimplexDomain dom(static_cast<Index>(ns[static_cast<std::size_t>(i)]));
    SolverOptions so;
    so.stop.max_iters = static_cast<int>(iters);
    traces[static_cast<std::size_t>(i)] = fw_run(squared_norm_objective(), dom, default_start(dom), so).trace;
  }
  const double c = 2.0;
  for (std::size_t i = 0; i < ns.size(); ++i)
    for (const TraceRow& row : traces[i].rows)
      csv << static_cast<long long>(ns[i]) << "," << row.k << "," << format_double(row.f - 1.0 / ns[i]) << ","
          << format_double(row.gap) << "," << format_double(4.0 * c / (row.k + 2)) << ","
          << format_double(8.0 * c / (row.k + 2)) << "\n";
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_solve(const json& config, std::ostream& out) {
  check_keys(config, {"objective", "domain", "schedule", "eps", "max_iters", "seed", "output"}, "config");
  const json& obj = need(config, "objective", "config");
  expect_object(obj, "objective");
  const std::string type = string_of(obj, "type", "objective");
  if (type == "matcomp") return solve_matcomp(config, out);
  if (type == "sdpfeas") return solve_sdpfeas(config, out);
  std::string domain = "simplex";
  if (config.contains("domain")) {
    expect_object(config.at("domain"), "domain");
    domain = string_of(config.at("domain"), "type", "domain");
  }
  if (domain == "spectahedron") return solve_spectahedron(config, out);
  return solve_vector(config, out);
}

int cmd_complete(const CompleteArgs& a, std::ostream& out) {
  const CompletionOptions opt = completion_options(a);
  const PreparedRatings p = prepare_ratings(a);
  // (mu_i + mu_j) / 2 alone
  auto offsets = [&](const std::vector<Rating>& split) {
    Vec v(static_cast<Index>(split.size()));
    for (std::size_t e = 0; e < split.size(); ++e) v[static_cast<Index>(e)] = p.normalizer.offset(split[e].i, split[e].j);
    return v;
  };
  const ErrorMetrics base_test = metrics(offsets(p.split.test), p.split.test, opt.rating_range);
  const ErrorMetrics base_train = metrics(offsets(p.split.train), p.split.train, opt.rating_range);

  json summary;
  summary["m"] = p.data.m;
  summary["n"] = p.data.n;
  summary["train_ratings"] = p.data.train.size();
  summary["test_ratings"] = p.data.test.size();
  summary["t"] = a.t;
  summary["steps"] = a.steps;
  summary["preset"] = a.preset;
  summary["seed"] = a.seed;
  summary["baseline"] = {{"train", metrics_json(base_train)}, {"test", metrics_json(base_test)}};

  if (a.steps == 0) {
    summary["train"] = metrics_json(base_train);
    summary["test"] = metrics_json(base_test);
    summary["matvecs"] = 0;
    if (!a.trace_path.empty()) RunTrace{}.write_csv(a.trace_path, a.timing);
  } else {
    const CompletionResult r = complete(p.data, opt);
    summary["train"] = metrics_json(r.train_metrics);
    summary["test"] = metrics_json(r.test_metrics);
    summary["matvecs"] = r.matvecs;
    summary["rank"] = r.x.size();
    if (a.timing) summary["millis"] = r.millis;
    json steps = json::array();
    for (const StepMetrics& s : r.steps) {
      json row = {{"k", s.k},
                  {"f", num(s.f)},
                  {"rmse_train", num(s.rmse_train)},
                  {"rmse_test", num(s.rmse_test)},
                  {"nmae_test", num(s.nmae_test)},
                  {"matvecs", s.matvecs}};
      if (a.timing) row["millis"] = s.millis;
      steps.push_back(row);
    }
    summary["per_step"] = steps;
    write_trace(r.trace, a.trace_path, a.timing);
  }
  emit(summary, a.metrics_path, out);
  return kOk;
}

int cmd_sdpfeas(const SdpfeasArgs& a, std::ostream& out) {
  if (!(a.eps > 0.0)) throw ConfigError("eps: must be positive");
  if (a.max_iters && *a.max_iters < 0) throw ConfigError("max_iters: must be nonnegative");
  const FeasibilitySDP sdp = load_feasibility_sdp(a.problem);
  FeasOptions fo;
  fo.max_iters = a.max_iters;
  fo.seed = a.seed;
  json summary;
  summary["n"] = sdp.n;
  summary["m"] = sdp.m();
  summary["t"] = sdp.t;
  summary["eps"] = a.eps;
  if (sdp.objective) {
    const BinarySearchResult r = binary_search_objective(*sdp.objective, sdp, a.eps, std::nullopt, 30, fo);
    summary["mode"] = "maximize";
    summary["found"] = r.found;
    summary["objective"] = r.found ? num(r.objective) : json(nullptr);
    summary["lo"] = r.lo;
    summary["hi"] = r.hi;
    summary["rounds"] = r.rounds;
    summary["undetermined_rounds"] = r.undetermined;
    if (r.found) {
      summary["max_violation"] = sdp.m() ? num(sdp.max_violation(r.x)) : json(nullptr);
      summary["rank"] = r.x.size();
    }
    emit(summary, a.summary_path, out);
    return r.found && r.undetermined == 0 ? kOk : kUncertified;
  }
  const FeasResult r = solve_eps_feasible(sdp, a.eps, fo);
  summary["mode"] = "feasibility";
  summary["status"] = to_string(r.status);
  summary["f"] = num(r.f);
  summary["max_violation"] = num(r.max_violation);
  summary["lower_bound"] = num(r.lower_bound);
  summary["violation_lower_bound"] = num(r.violation_lower_bound);
  summary["sigma"] = r.sigma;
  summary["curvature"] = r.curvature;
  summary["eigen_calls"] = r.eigen_calls;
  summary["budget"] = r.budget;
  summary["rank"] = r.x.size();
  write_trace(r.trace, a.trace_path, a.timing);
  emit(summary, a.summary_path, out);
  return r.status == FeasStatus::undetermined ? kUncertified : kOk;
}

int cmd_bench(const json& config, const std::string& csv_path, std::ostream& out) {
  expect_object(config, "bench");
  const std::string kind = string_of(config, "kind", "bench");
  std::ostringstream csv;
  if (kind == "t_sweep")
    bench_t_sweep(config, csv);
  else if (kind == "k_sweep")
    bench_k_sweep(config, csv);
  else
    throw ConfigError("bench.kind: expected t_sweep or k_sweep");
  if (csv_path.empty()) {
    out << csv.str();
  } else {
    std::ofstream f(csv_path);
    if (!f) throw DataError("cannot write " + csv_path);
    f << csv.str();
  }
  return kOk;
}

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Frank-Wolfe solvers for sparse and low-rank convex problems"};
  app.require_subcommand(1);

  std::string solve_config;
  auto* solve = app.add_subcommand("solve", "run one problem from a JSON config");
  solve->add_option("config", solve_config, "config file")->required();

  CompleteArgs ca;
  auto* comp = app.add_subcommand("complete", "matrix completion on a MovieLens ratings file");
  comp->add_option("--data", ca.data, "ratings file")->required();
  comp->add_option("--format", ca.format, "tab_100k or dat_1m");
  comp->add_option("--t", ca.t, "trace-norm bound");
  comp->add_option("--steps", ca.steps, "Frank-Wolfe steps");
  comp->add_flag("--line-search,!--no-line-search", ca.line_search, "closed-form line search");
  comp->add_flag("--grad-avg", ca.grad_avg, "gradient-averaging eigenvector search");
  comp->add_option("--split", ca.split, "train fraction or holdout:r");
  comp->add_option("--preset", ca.preset, "asis or means");
  comp->add_flag("--accuracy-driven", ca.accuracy_driven, "eigensolver accuracy alpha*C_f instead of the power budget");
  comp->add_option("--seed", ca.seed, "seed for the split and the solver");
  comp->add_option("--trace", ca.trace_path, "trace CSV path");
  comp->add_option("--metrics", ca.metrics_path, "metrics JSON path");
  comp->add_flag("--timing", ca.timing, "include wall time in outputs");

  SdpfeasArgs sa;
  int sdp_iters = -1;
  auto* feas = app.add_subcommand("sdpfeas", "eps-feasibility of a bounded-trace SDP");
  feas->add_option("problem", sa.problem, "problem file")->required();
  feas->add_option("--eps", sa.eps, "feasibility tolerance");
  feas->add_option("--max-iters", sdp_iters, "eigen-call budget override");
  feas->add_option("--seed", sa.seed, "seed");
  feas->add_option("--trace", sa.trace_path, "trace CSV path");
  feas->add_option("--summary", sa.summary_path, "summary JSON path");
  feas->add_flag("--timing", sa.timing, "include wall time in the CSV");

  std::string bench_config, bench_out;
  auto* bench = app.add_subcommand("bench", "parameter sweeps to CSV");
  bench->add_option("config", bench_config, "sweep config")->required();
  bench->add_option("--out", bench_out, "CSV path (stdout when empty)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*solve) return cmd_solve(read_json_file(solve_config), std::cout);
    if (*comp) return cmd_complete(ca, std::cout);
    if (*feas) {
      if (sdp_iters >= 0) sa.max_iters = sdp_iters;
      return cmd_sdpfeas(sa, std::cout);
    }
    if (*bench) return cmd_bench(read_json_file(bench_config), bench_out, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kUncertified;
  }
  return kConfigError;
}

}  // namespace fw::cli
