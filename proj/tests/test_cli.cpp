#include <doctest.h>

#include <iostream>
#include <map>
#include <sstream>

#include "fw/cli_commands.hpp"
#include "fw/matcomp.hpp"
#include "fw/vector_problem.hpp"
#include "support.hpp"

using namespace fw;
using nlohmann::json;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun run_fwopt(std::vector<std::string> args) {
  args.insert(args.begin(), "fwopt");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  CliRun r;
  r.code = cli::run_cli(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string write_json(const std::filesystem::path& dir, const std::string& name, const json& j) {
  const auto p = dir / name;
  fwtest::write_file(p, j.dump());
  return p.string();
}

// 30 users x 20 items, ratings 1..5 from a planted low-rank pattern
std::string write_ratings(const std::filesystem::path& dir) {
  fwtest::Rand rnd(11);
  const Mat u = rnd.normal_mat(30, 2), v = rnd.normal_mat(20, 2);
  std::ostringstream s;
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 20; ++j) {
      if (rnd.uniform(0.0, 1.0) > 0.6) continue;
      const double y = std::clamp(std::round(3.0 + u.row(i).dot(v.row(j))), 1.0, 5.0);
      s << (i + 1) << "\t" << (j + 101) << "\t" << y << "\t" << (880000000 + i * 20 + j) << "\n";
    }
  const auto p = dir / "u.data";
  fwtest::write_file(p, s.str());
  return p.string();
}

}  // namespace

TEST_CASE("exit codes for bad input") {
  const auto dir = fwtest::temp_dir("cli_codes");
  CHECK(run_fwopt({"solve", (dir / "missing.json").string()}).code == cli::kConfigError);
  fwtest::write_file(dir / "broken.json", "{\"objective\": ");
  CHECK(run_fwopt({"solve", (dir / "broken.json").string()}).code == cli::kConfigError);

  const json bad_schemas[] = {
      {{"objective", {{"type", "squared_norm"}, {"n", 3}}}, {"colour", "red"}},
      {{"objective", {{"type", "squared_norm"}}}},
      {{"objective", {{"type", "squared_norm"}, {"n", "three"}}}},
      {{"objective", {{"type", "nope"}, {"n", 3}}}},
      {{"objective", {{"type", "squared_norm"}, {"n", 3}}}, {"eps", -1.0}},
      {{"objective", {{"type", "squared_norm"}, {"n", 3}}}, {"domain", {{"type", "torus"}}}},
      {{"objective", {{"type", "squared_norm"}, {"n", 3}}}, {"schedule", "sometimes"}},
      {{"objective", {{"type", "quadratic"}, {"Q", {{1, 2}, {0, 1}}}, {"c", {0, 0}}}}},
  };
  int i = 0;
  for (const json& cfg : bad_schemas) {
    const CliRun r = run_fwopt({"solve", write_json(dir, "bad" + std::to_string(i++) + ".json", cfg)});
    CHECK(r.code == cli::kConfigError);
    CHECK(r.err.find("config error") != std::string::npos);
  }

  const json no_data = {{"objective", {{"type", "matcomp"}, {"path", (dir / "nowhere.data").string()}}}};
  CHECK(run_fwopt({"solve", write_json(dir, "nodata.json", no_data)}).code == cli::kDataError);
  CHECK(run_fwopt({"complete", "--data", (dir / "nowhere.data").string()}).code == cli::kDataError);
  CHECK(run_fwopt({"sdpfeas", (dir / "nowhere.sdp").string()}).code == cli::kDataError);
  const json qfile = {{"objective", {{"type", "quadratic_file"}, {"path", (dir / "q.txt").string()}}}};
  fwtest::write_file(dir / "q.txt", "2\n1 0 0 1\n0\n");
  CHECK(run_fwopt({"solve", write_json(dir, "q.json", qfile)}).code == cli::kDataError);

  CHECK(run_fwopt({"frobnicate"}).code == cli::kConfigError);
  CHECK(run_fwopt({}).code == cli::kConfigError);
  CHECK(run_fwopt({"complete", "--data", "x", "--steps", "many"}).code == cli::kConfigError);
  CHECK(run_fwopt({"--help"}).code == cli::kOk);
}

TEST_CASE("empty sweeps write only the header") {
  const auto dir = fwtest::temp_dir("cli_bench");
  const json k = {{"kind", "k_sweep"}, {"n", json::array()}};
  const CliRun r = run_fwopt({"bench", write_json(dir, "k.json", k), "--out", (dir / "k.csv").string()});
  CHECK(r.code == cli::kOk);
  CHECK(fwtest::read_file(dir / "k.csv") == "n,k,primal_error,gap,bound_exact,bound_approx\n");
  const json t = {{"kind", "t_sweep"}, {"data", (dir / "none.data").string()}, {"t", json::array()}};
  CHECK(run_fwopt({"bench", write_json(dir, "t.json", t), "--out", (dir / "t.csv").string()}).code == cli::kOk);
  CHECK(fwtest::read_file(dir / "t.csv") == "t,rmse_train,rmse_test,nmae_test,matvecs\n");

  const json k2 = {{"kind", "k_sweep"}, {"n", {5}}, {"max_iters", 3}};
  const CliRun r2 = run_fwopt({"bench", write_json(dir, "k2.json", k2)});
  std::istringstream lines(r2.out);
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) ++count;
  CHECK(count == 5);  // header and k = 0..3
  CHECK(run_fwopt({"bench", write_json(dir, "k3.json", {{"kind", "spiral"}})}).code == cli::kConfigError);
}

TEST_CASE("fixed seeds give byte-identical traces") {
  const auto dir = fwtest::temp_dir("cli_det");
  const std::string data = write_ratings(dir);
  for (const std::string preset : {"asis", "means"}) {
    std::string first;
    for (int rep = 0; rep < 2; ++rep) {
      const auto trace = dir / ("trace" + std::to_string(rep) + ".csv");
      const CliRun r = run_fwopt({"complete", "--data", data, "--t", "50", "--steps", "12", "--preset", preset, "--seed", "4",
                            "--trace", trace.string()});
      CHECK(r.code == cli::kOk);
      const std::string csv = fwtest::read_file(trace);
      CHECK(csv.rfind("k,f,gap,alpha,atom,matvecs,millis\n", 0) == 0);
      if (rep == 0)
        first = csv;
      else
        CHECK(csv == first);
      CHECK(json::parse(r.out).contains("per_step"));
    }
  }

  const json cfg = {{"objective", {{"type", "frobenius_dist"}, {"target", {{1, 0.5, 0}, {0.5, 2, 0}, {0, 0, 0.1}}}}},
                    {"domain", {{"type", "spectahedron"}, {"t", 1.5}}},
                    {"max_iters", 30},
                    {"seed", 2},
                    {"output", {{"trace", (dir / "s.csv").string()}}}};
  const std::string path = write_json(dir, "spect.json", cfg);
  CHECK(run_fwopt({"solve", path}).code == cli::kOk);
  const std::string a = fwtest::read_file(dir / "s.csv");
  CHECK(run_fwopt({"solve", path}).code == cli::kOk);
  CHECK(fwtest::read_file(dir / "s.csv") == a);
}

TEST_CASE("lasso config matches the library run") {
  const auto dir = fwtest::temp_dir("cli_lasso");
  fwtest::Rand rnd(3);
  const Mat a = rnd.normal_mat(8, 12);
  const Vec b = rnd.normal_vec(8);
  const double t = 2.0;
  json ja = json::array();
  for (Index r = 0; r < a.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < a.cols(); ++c) row.push_back(a(r, c));
    ja.push_back(row);
  }
  const json cfg = {{"objective", {{"type", "lasso"}, {"A", ja}, {"b", std::vector<double>(b.data(), b.data() + 8)}, {"t", t}}},
                    {"max_iters", 60},
                    {"output", {{"trace", (dir / "lasso.csv").string()}, {"summary", (dir / "lasso.json").string()}}}};
  const CliRun r = run_fwopt({"solve", write_json(dir, "lasso.json.cfg", cfg)});
  REQUIRE(r.code == cli::kOk);

  const L1BallDomain ball(12, 1.0);
  VectorObjective f = least_squares_objective(t * a, b);
  SolverOptions so;
  so.stop.max_iters = 60;
  const VectorRunResult lib = fw_run(f, ball, default_start(ball), so);
  std::ostringstream csv;
  lib.trace.write_csv(csv, false);
  CHECK(fwtest::read_file(dir / "lasso.csv") == csv.str());
  const json summary = json::parse(fwtest::read_file(dir / "lasso.json"));
  CHECK(summary["f"].get<double>() == f.eval(lib.x));
  CHECK(summary["domain"] == ball.name());
  for (Index i = 0; i < 12; ++i) CHECK(summary["x"][static_cast<std::size_t>(i)].get<double>() == lib.x[i]);
  CHECK(json::parse(r.out) == summary);
}

TEST_CASE("zero steps report the mean-offset baseline") {
  const auto dir = fwtest::temp_dir("cli_base");
  const std::string data = write_ratings(dir);
  const CliRun r = run_fwopt({"complete", "--data", data, "--steps", "0", "--seed", "1", "--trace", (dir / "t.csv").string()});
  REQUIRE(r.code == cli::kOk);
  const json s = json::parse(r.out);
  CHECK(s["test"] == s["baseline"]["test"]);
  CHECK(s["matvecs"] == 0);
  CHECK(fwtest::read_file(dir / "t.csv") == "k,f,gap,alpha,atom,matvecs,millis\n");

  // independent: offsets from train means on the same split
  const RatingDataset split =
      split_train_test(load_movielens(data, MovieLensFormat::tab_100k), SplitPolicy::random_fraction(0.5, 1));
  std::map<int, std::pair<double, int>> rows, cols;
  for (const Rating& x : split.train) {
    rows[x.i].first += x.y, ++rows[x.i].second;
    cols[x.j].first += x.y, ++cols[x.j].second;
  }
  double total = 0.0;
  for (const Rating& x : split.train) total += x.y;
  const double global = total / split.train.size();
  auto mean = [&](std::map<int, std::pair<double, int>>& m, int k) {
    return m.count(k) ? m[k].first / m[k].second : global;
  };
  double abs_err = 0.0;
  for (const Rating& x : split.test) abs_err += std::abs(0.5 * (mean(rows, x.i) + mean(cols, x.j)) - x.y);
  CHECK(s["test"]["nmae"].get<double>() == doctest::Approx(abs_err / split.test.size() / 4.0).epsilon(1e-12));
  CHECK(s["train_ratings"].get<std::size_t>() + s["test_ratings"].get<std::size_t>() == split.size());

  // a positive step count on the means preset improves on the training baseline
  const json fit = json::parse(run_fwopt({"complete", "--data", data, "--steps", "20", "--seed", "1", "--preset", "means",
                                    "--t", "40"})
                                   .out);
  CHECK(fit["train"]["rmse"].get<double>() < fit["baseline"]["train"]["rmse"].get<double>());
}

TEST_CASE("certified quadratic run on the simplex") {
  const auto dir = fwtest::temp_dir("cli_quad");
  fwtest::Rand rnd(9);
  const Mat g = rnd.normal_mat(6, 6);
  const Mat q = g * g.transpose() + Mat::Identity(6, 6);
  json jq = json::array();
  for (Index r = 0; r < 6; ++r) {
    json row = json::array();
    for (Index c = 0; c < 6; ++c) row.push_back(q(r, c));
    jq.push_back(row);
  }
  const double eps = 0.05;
  const json cfg = {{"objective", {{"type", "quadratic"}, {"Q", jq}, {"c", {1, -2, 0.5, 0, 3, -1}}}},
                    {"eps", eps},
                    {"output", {{"trace", (dir / "q.csv").string()}}}};
  const CliRun r = run_fwopt({"solve", write_json(dir, "q.json", cfg)});
  CHECK(r.code == cli::kOk);
  const json s = json::parse(r.out);
  CHECK(s["certified"] == true);
  CHECK(s["certified_gap"].get<double>() <= eps);
  CHECK(s["gap"].get<double>() <= eps);
  CHECK(s["domain"] == "simplex");
  double sum = 0.0;
  for (const auto& v : s["x"]) {
    CHECK(v.get<double>() >= 0.0);
    sum += v.get<double>();
  }
  CHECK(sum == doctest::Approx(1.0));
}

TEST_CASE("sdpfeas verdicts and exit codes") {
  const auto dir = fwtest::temp_dir("cli_sdp");
  fwtest::write_file(dir / "trace2.sdp", "n 4\nconstraint -2\n0 0 -1\n1 1 -1\n2 2 -1\n3 3 -1\n");
  const CliRun inf = run_fwopt({"sdpfeas", (dir / "trace2.sdp").string(), "--eps", "0.5"});
  CHECK(inf.code == cli::kOk);
  CHECK(json::parse(inf.out)["status"] == "infeasible");

  fwtest::write_file(dir / "easy.sdp", "n 3\nconstraint 1\n0 0 1\n1 1 1\n2 2 1\n");
  const CliRun ok = run_fwopt({"sdpfeas", (dir / "easy.sdp").string(), "--trace", (dir / "e.csv").string()});
  CHECK(ok.code == cli::kOk);
  CHECK(json::parse(ok.out)["status"] == "feasible");

  // a budget of zero eigen calls decides nothing
  fwtest::write_file(dir / "hard.sdp", "n 3\nconstraint 0.2\n0 0 1\nconstraint 0.2\n1 1 1\nconstraint 0.2\n2 2 1\n");
  const CliRun und = run_fwopt({"sdpfeas", (dir / "hard.sdp").string(), "--eps", "0.01", "--max-iters", "0"});
  CHECK(und.code == cli::kUncertified);
  CHECK(json::parse(und.out)["status"] == "undetermined");

  fwtest::write_file(dir / "max.sdp", "n 2\nconstraint 10\n0 0 1\nobjective\n0 0 3\n1 1 1\n");
  const CliRun mx = run_fwopt({"sdpfeas", (dir / "max.sdp").string(), "--eps", "0.01"});
  CHECK(mx.code == cli::kOk);
  const json ms = json::parse(mx.out);
  CHECK(ms["mode"] == "maximize");
  CHECK(ms["objective"].get<double>() == doctest::Approx(3.0).epsilon(0.01));

  fwtest::write_file(dir / "bad.sdp", "n 2\nconstraint 1\n0 5 1\n");
  CHECK(run_fwopt({"sdpfeas", (dir / "bad.sdp").string()}).code == cli::kDataError);
  CHECK(run_fwopt({"sdpfeas", (dir / "easy.sdp").string(), "--eps", "-1"}).code == cli::kConfigError);
}
