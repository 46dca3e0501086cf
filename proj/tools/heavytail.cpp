// heavytail command-line front end.
//
// Exit codes: 0 success, 1 usage or validation error, 2 runtime failure.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "heavytail/experiment.hpp"

namespace ht = heavytail;
using nlohmann::json;

namespace {

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::optional<std::string> out_dir;
};

ht::ExperimentConfig load_with_overrides(const std::string& path, const GlobalOptions& g) {
  ht::ExperimentConfig c = ht::load_config(path);
  if (g.seed) c.seed = *g.seed;
  if (g.out_dir) c.out_dir = *g.out_dir;
  return c;
}

int cmd_run(const std::string& path, std::optional<std::size_t> hist, const GlobalOptions& g) {
  ht::ExperimentConfig c = load_with_overrides(path, g);
  if (hist) c.hist_bins = *hist;
  ht::RunOptions opts;
  opts.threads = g.threads;
  const auto report = ht::run_experiment(c, opts);
  const auto files = ht::write_outputs(report);
  for (const auto& r : report.per_n) {
    std::cout << "n=" << r.n << " " << r.statistic << " KS=" << ht::format_double(r.ks)
              << " CvM=" << ht::format_double(r.cvm)
              << " crit95=" << ht::format_double(r.ks_critical)
              << " D_n=" << ht::format_double(r.Dn.D) << "\n";
  }
  for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
  return 0;
}

int cmd_normalizer(const std::string& path, const GlobalOptions& g) {
  const ht::ExperimentConfig c = load_with_overrides(path, g);
  const ht::TailModel model = c.tail_model();
  const bool regvar = c.weights.kind == ht::WeightSource::Kind::linear &&
                      c.weights.spec->kind() == ht::CoefficientSpec::Kind::regvar;
  std::cout << "n\tD_n\tresidual" << (regvar ? "\tasymptotic" : "") << "\n";
  for (std::int64_t n : c.n_list) {
    const ht::PreparedN p = ht::prepare_n(c, n);
    std::cout << n << "\t" << ht::format_double(p.Dn.D) << "\t" << ht::format_double(p.Dn.residual);
    if (regvar) {
      const auto& s = *c.weights.spec;
      std::cout << "\t"
                << ht::format_double(ht::asymptotic_Dn_regvar(s.alpha(), s.slowly_varying(), n, model));
    }
    std::cout << "\n";
  }
  return 0;
}

double parse_number(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ht::ConfigError("coeffs: '" + key + "' expects a number, got '" + text + "'");
  }
  return v;
}

int cmd_coeffs(const std::string& kind, const std::vector<std::string>& params, std::size_t count,
               std::optional<std::int64_t> window) {
  json spec = {{"kind", kind}};
  for (const auto& p : params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ht::ConfigError("coeffs: parameters must look like key=value, got '" + p + "'");
    }
    const std::string key = p.substr(0, eq);
    const std::string val = p.substr(eq + 1);
    if (key == "values") {
      json arr = json::array();
      std::stringstream ss(val);
      std::string item;
      while (std::getline(ss, item, ',')) arr.push_back(parse_number(key, item));
      spec[key] = arr;
    } else if (key == "first_lag") {
      spec[key] = static_cast<std::int64_t>(parse_number(key, val));
    } else if (key == "L.constant" || key == "L.log_power") {
      spec["L"][key.substr(2)] = parse_number(key, val);
    } else {
      spec[key] = parse_number(key, val);
    }
  }
  const ht::CoefficientSpec s = ht::parse_coefficient_spec(spec.dump());
  if (!window) {
    for (double a : s.coefficients(count)) std::cout << ht::format_double(a) << "\n";
    return 0;
  }
  const std::int64_t n = *window;
  if (n < 1) throw ht::ConfigError("coeffs: --window must be >= 1");
  // b_nj = A_{j+n} - A_j over j = first_lag - n, ..., straight from prefix sums.
  const auto a = s.coefficients(count + static_cast<std::size_t>(n));
  std::vector<double> prefix(a.size() + 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) prefix[i + 1] = prefix[i] + a[i];
  std::cerr << "# b_nj for j = " << s.first_lag() - n << " .. "
            << s.first_lag() - n + static_cast<std::int64_t>(count) - 1 << "\n";
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t lo = k + 1 > static_cast<std::size_t>(n) ? k + 1 - static_cast<std::size_t>(n) : 0;
    const double b = prefix[k + 1] - prefix[lo];
    std::cout << ht::format_double(b) << "\n";
  }
  return 0;
}

int cmd_check(const std::string& path, const GlobalOptions& g) {
  ht::ExperimentConfig c = load_with_overrides(path, g);
  if (!c.checks.gen && !c.checks.coeffD && !c.checks.coeff0 && !c.checks.M1) {
    c.checks = {true, true, true, true, c.checks.m1_samples};
  }
  ht::gate_linear(c);
  json out = json::array();
  for (std::int64_t n : c.n_list) {
    const ht::PreparedN p = ht::prepare_n(c, n);
    const auto r = ht::run_checks(c, p);
    json e = {{"n", n}, {"Dn", p.Dn.D}};
    if (r.gen) e["gen"] = {{"sum_cond", r.gen->sum_cond}, {"max_cond", r.gen->max_cond}};
    if (r.coeffD) e["coeffD"] = *r.coeffD;
    if (r.coeff0) {
      e["coeff0"] = {{"converges", r.coeff0->converges},
                     {"partial", r.coeff0->partial},
                     {"tail_bound", r.coeff0->tail_bound}};
    }
    for (const auto& row : r.m1) {
      e["M1"].push_back({{"lag", row.lag},
                         {"a", row.a},
                         {"b", row.b},
                         {"normalized_cov", row.normalized_cov},
                         {"std_error", row.std_error}});
    }
    if (r.rho_lag1) e["rho_lag1"] = *r.rho_lag1;
    if (r.rho_beyond_m) e["rho_beyond_m"] = *r.rho_beyond_m;
    out.push_back(e);
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_gof(const std::string& path, const std::string& column, std::optional<std::size_t> hist,
            const GlobalOptions& g) {
  std::ifstream in(path);
  if (!in) throw ht::ConfigError("gof: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ht::ConfigError("gof: empty file '" + path + "'");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const auto it = std::find(header.begin(), header.end(), column);
  if (it == header.end()) throw ht::ConfigError("gof: no column '" + column + "' in " + path);
  const auto col = static_cast<std::size_t>(it - header.begin());

  std::vector<double> values;
  std::size_t undefined = 0;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t k = 0;
    bool found = false;
    while (std::getline(ss, cell, ',')) {
      if (k++ == col) {
        found = true;
        break;
      }
    }
    if (!found) throw ht::ConfigError("gof: row " + std::to_string(row) + " is too short");
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
      throw ht::ConfigError("gof: bad number '" + cell + "' on row " + std::to_string(row));
    }
    if (std::isnan(v)) {
      ++undefined;
    } else {
      values.push_back(v);
    }
  }
  if (values.empty()) throw ht::ConfigError("gof: no defined values in column " + column);
  const ht::Summary s = ht::summarize(values);
  json out = {{"file", path},
              {"column", column},
              {"count", values.size()},
              {"undefined_count", undefined},
              {"ks", ht::ks_normal(values)},
              {"cvm", ht::cvm_normal(values)},
              {"ks_critical_95", ht::ks_critical_95(values.size())},
              {"mean", s.mean},
              {"variance", s.variance},
              {"median", s.median}};
  std::cout << out.dump(2) << "\n";
  if (hist) {
    ht::NResult r;
    r.scored = values;
    const std::filesystem::path dir = g.out_dir ? std::filesystem::path(*g.out_dir)
                                                : std::filesystem::path(path).parent_path();
    const auto target =
        dir / (std::filesystem::path(path).stem().string() + "_" + column + "_hist.csv");
    if (!dir.empty()) std::filesystem::create_directories(dir);
    std::ofstream h(target, std::ios::binary);
    h << ht::histogram_csv(r, *hist);
    if (!h) throw std::runtime_error("gof: failed writing " + target.string());
    std::cerr << "wrote " << target.string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo experiments for weighted sums and linear processes with heavy tails"};
  app.set_version_flag("--version", std::string(ht::kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  std::uint64_t seed = 0;
  std::string out_dir;
  auto* seed_opt = app.add_option("--seed", seed, "Override the master seed");
  app.add_option("--threads", g.threads, "Worker threads (default: HEAVYTAIL_THREADS or all cores)")
      ->check(CLI::PositiveNumber);
  auto* out_opt = app.add_option("--out-dir", out_dir, "Output directory");

  std::string config_path;
  std::optional<std::size_t> hist;

  auto* run = app.add_subcommand("run", "Run a full experiment and write CSV + JSON");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--emit-hist", hist, "Also write a histogram CSV with this many bins")
      ->check(CLI::PositiveNumber);

  auto* norm = app.add_subcommand("normalizer", "Print the D_n table over the configured n");
  norm->add_option("config", config_path, "Experiment config (JSON)")->required();

  std::string kind;
  std::vector<std::string> params;
  std::size_t count = 10;
  std::optional<std::int64_t> window;
  auto* coeffs = app.add_subcommand("coeffs", "Print coefficients a_j or window sums b_nj");
  coeffs->add_option("kind", kind, "explicit | regvar | fractional")->required();
  coeffs->add_option("params", params, "key=value parameters (values=1,2,3 for explicit)");
  coeffs->add_option("--count", count, "Number of values to print")->check(CLI::PositiveNumber);
  coeffs->add_option("--window", window, "Print b_nj for this n instead of a_j");

  auto* check = app.add_subcommand("check", "Run the condition checks only");
  check->add_option("config", config_path, "Experiment config (JSON)")->required();

  std::string csv_path;
  std::string column = "T_self";
  auto* gof = app.add_subcommand("gof", "Rescore a replicate CSV against N(0,1)");
  gof->add_option("csv", csv_path, "Replicate CSV")->required();
  gof->add_option("--column", column, "Column to score");
  gof->add_option("--emit-hist", hist, "Also write a histogram CSV with this many bins")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  if (*seed_opt) g.seed = seed;
  if (*out_opt) g.out_dir = out_dir;

  try {
    if (*run) return cmd_run(config_path, hist, g);
    if (*norm) return cmd_normalizer(config_path, g);
    if (*coeffs) return cmd_coeffs(kind, params, count, window);
    if (*check) return cmd_check(config_path, g);
    if (*gof) return cmd_gof(csv_path, column, hist, g);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
