#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "heavytail/experiment.hpp"
#include "heavytail/numerics.hpp"

using namespace heavytail;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("heavytail_test_" + name);
  fs::remove_all(d);
  return d;
}

const char* kBase = R"({
  "model": "pareto2",
  "weights": {"type": "equal"},
  "n": [200, 400],
  "replications": 64,
  "seed": 5,
  "normalizer": "Dn",
  "checks": ["gen", "coeffD", "M1"],
  "m1_samples": 2000,
  "hist_bins": 8
})";

}  // namespace

TEST_CASE("config parsing and validation") {
  const auto c = parse_config(kBase);
  CHECK(c.model == "pareto2");
  CHECK(c.n_list == std::vector<std::int64_t>{200, 400});
  CHECK(c.replications == 64);
  CHECK(c.normalizer == NormalizerChoice::Dn);
  CHECK(c.checks.gen);
  CHECK_FALSE(c.checks.coeff0);
  // The canonical form round-trips.
  const auto again = parse_config(c.canonical_json());
  CHECK(again.canonical_json() == c.canonical_json());

  const auto lin = parse_config(R"({"weights": {"type": "linear", "spec": {"kind": "regvar", "alpha": 0.8,
      "L": {"log_power": 1}}}, "n": 100, "innovations": {"flavor": "m-dependent", "m": 3}})");
  CHECK(lin.weights.kind == WeightSource::Kind::linear);
  CHECK(lin.weights.spec->alpha() == 0.8);
  CHECK(lin.weights.spec->slowly_varying().log_power == 1.0);
  CHECK(lin.innovations.flavor == Flavor::m_dependent);
  CHECK(lin.innovations.m == 3);

  const auto ex = parse_config(R"({"weights": {"type": "explicit", "values": [1, 2, 3]}})");
  CHECK(ex.n_list == std::vector<std::int64_t>{3});

  for (const char* bad : {
           R"({"weights": {"type": "equal"}, "n": [10], "replications": 0})",
           R"({"weights": {"type": "equal"}, "n": []})",
           R"({"weights": {"type": "equal"}})",
           R"({"weights": {"type": "equal"}, "n": [10], "normalizer": "max"})",
           R"({"weights": {"type": "equal"}, "n": [10], "model": "cauchy"})",
           R"({"weights": {"type": "equal"}, "n": [10], "colour": 1})",
           R"({"weights": {"type": "equal"}, "n": [0]})",
           R"({"weights": {"type": "linear", "spec": {"kind": "regvar", "alpha": 0.4}}, "n": [10]})",
           R"({"weights": {"type": "explicit", "values": [1, 2]}, "n": [3]})",
           R"({"weights": {"type": "equal"}, "n": [10], "innovations": "garch"})",
           R"({"weights": {"type": "equal"}, "n": [10], "checks": ["nope"]})",
           R"({"weights": {"type": "equal"}, "n": [10], "epsilon_tail": 2})",
           R"({not json)"}) {
    CHECK_THROWS_AS((void)parse_config(bad), ConfigError);
  }
  CHECK_THROWS_AS((void)load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("triangular rows") {
  TriangularRow r;
  r.kind = TriangularRow::Kind::regression;
  const auto w = r.build(5);
  double sum = 0.0;
  for (double c : w.entries) sum += c;
  CHECK(std::abs(sum) < 1e-15);
  CHECK(w.entries[2] == 0.0);
  r.kind = TriangularRow::Kind::power;
  r.gamma = 0.25;
  CHECK(r.build(16).entries[15] == doctest::Approx(0.5));
}

TEST_CASE("runs are deterministic and independent of thread count") {
  auto c = parse_config(kBase);
  RunOptions one;
  one.threads = 1;
  RunOptions four;
  four.threads = 4;
  const auto a = run_experiment(c, one);
  const auto b = run_experiment(c, four);
  CHECK(report_json(a) == report_json(b));
  for (std::size_t i = 0; i < a.per_n.size(); ++i) {
    CHECK(replicates_csv(a.per_n[i]) == replicates_csv(b.per_n[i]));
  }
  const auto& r = a.per_n[0];
  CHECK(r.reps.size() == 64);
  CHECK(r.ks >= 0.0);
  CHECK(r.ks <= 1.0);
  CHECK(r.checks.gen.has_value());
  CHECK(r.checks.coeffD.has_value());
  CHECK(r.checks.m1.size() == 9);
  CHECK(replicates_csv(r).rfind(std::string(kCsvHeader) + "\n0,", 0) == 0);

  c.seed = 6;
  CHECK(report_json(run_experiment(c, one)) != report_json(a));
}

TEST_CASE("outputs are written completely and identically") {
  auto c = parse_config(kBase);
  c.out_dir = fresh_dir("out1").string();
  c.prefix = "exp";
  const auto files1 = write_outputs(run_experiment(c));
  CHECK(files1.size() == 5);
  for (const auto& f : files1) CHECK(fs::exists(f));
  const auto csv = slurp(fs::path(c.out_dir) / "exp_n200.csv");
  CHECK(csv.rfind("rep_id,S,V_raikov,V_path,T_D,T_self,ratio_LLN\n", 0) == 0);
  CHECK(slurp(fs::path(c.out_dir) / "exp_n200_hist.csv").rfind("bin_center,count\n", 0) == 0);

  auto c2 = c;
  c2.out_dir = fresh_dir("out2").string();
  const auto files2 = write_outputs(run_experiment(c2, RunOptions{3, {}, {}}));
  for (std::size_t i = 0; i < files1.size(); ++i) CHECK(slurp(files1[i]) == slurp(files2[i]));
  for (const auto& e : fs::directory_iterator(c.out_dir)) {
    CHECK(e.path().extension() != ".partial");
  }
}

TEST_CASE("failures leave no partial output") {
  auto c = parse_config(kBase);
  const fs::path dir = fresh_dir("fail");
  c.out_dir = dir.string();
  RunOptions opts;
  opts.replicate = [](std::int64_t n, std::uint64_t rep, InnovationStream&) -> PathStatistics {
    if (n == 400 && rep == 17) throw std::runtime_error("injected failure");
    PathStatistics p;
    p.S = 1.0;
    p.V_raikov = 1.0;
    return p;
  };
  CHECK_THROWS_WITH_AS((void)run_experiment(c, opts), "injected failure", std::runtime_error);
  CHECK_FALSE(fs::exists(dir));

  // An output path blocked by a regular file fails before anything is renamed.
  fs::create_directories(dir);
  std::ofstream(dir / "exp_report.json.partial").close();
  fs::create_directory(dir / "exp_report.json");  // rename target is a directory
  c.prefix = "exp";
  CHECK_THROWS((void)write_outputs(run_experiment(c)));
  CHECK_FALSE(fs::exists(dir / "exp_n200.csv"));
  CHECK_FALSE(fs::exists(dir / "exp_n200.csv.partial"));
}

TEST_CASE("condition gating refuses linear processes that fail coeff0") {
  auto c = parse_config(R"({"weights": {"type": "linear", "spec": {"kind": "explicit", "values": [1, 0.5]}},
                            "n": [50], "replications": 8})");
  RunOptions opts;
  opts.coeff0 = [](const CoefficientSpec&, const TailModel&) {
    return Coeff0Check{false, 1.0, std::numeric_limits<double>::infinity()};
  };
  CHECK_THROWS_AS((void)run_experiment(c, opts), ConditionError);
  const auto ok = run_experiment(c);
  REQUIRE(ok.per_n.size() == 1);
  CHECK(ok.per_n[0].window.has_value());
  CHECK(ok.per_n[0].kulik_target_var == doctest::Approx(1.5 * 1.5 / 1.25));
}

TEST_CASE("scorer rejects a degenerate stream and accepts injected normals") {
  auto c = parse_config(R"({"weights": {"type": "equal"}, "n": [100], "replications": 500,
                            "innovations": "degenerate", "normalizer": "self"})");
  const auto deg = run_experiment(c);
  CHECK(deg.per_n[0].ks > 0.99);
  CHECK(report_json(deg).find("\"normal_at_95\": false") != std::string::npos);

  c.innovations.flavor = Flavor::iid;
  RunOptions opts;
  opts.replicate = [](std::int64_t, std::uint64_t rep, InnovationStream&) {
    Rng r(mix_stream(99, rep));
    PathStatistics p;
    p.S = normal_quantile(r.uniform_open());
    p.V_raikov = 1.0;
    p.T_self = p.S;
    return p;
  };
  const auto inj = run_experiment(c, opts);
  CHECK(inj.per_n[0].ks < 1.63 / std::sqrt(500.0));
}

TEST_CASE("B_n normalization and undefined statistics") {
  auto c = parse_config(R"({"weights": {"type": "equal"}, "n": [100], "replications": 200,
                            "normalizer": "Bn"})");
  const auto r = run_experiment(c);
  REQUIRE(r.per_n[0].Bn.has_value());
  CHECK(r.per_n[0].statistic == "T_Bn");
  CHECK(r.per_n[0].Bn->value > 0.0);

  auto z = parse_config(R"({"weights": {"type": "equal"}, "n": [10], "replications": 20})");
  RunOptions opts;
  opts.replicate = [](std::int64_t, std::uint64_t rep, InnovationStream&) {
    PathStatistics p;
    if (rep % 2 == 0) {
      p.S = 0.5;
      p.V_raikov = 1.0;
      p.T_self = 0.5;
    }
    return p;
  };
  const auto u = run_experiment(z, opts);
  CHECK(u.per_n[0].undefined_count == 10);
  CHECK(u.per_n[0].scored.size() == 10);
}

TEST_CASE("thread resolution") {
  CHECK(resolve_threads(3) == 3);
  CHECK(resolve_threads(0) >= 1);
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}
