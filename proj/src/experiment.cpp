#include "heavytail/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "heavytail/rng.hpp"

namespace heavytail {

using nlohmann::json;

std::string_view to_string(NormalizerChoice c) noexcept {
  switch (c) {
    case NormalizerChoice::Dn: return "Dn";
    case NormalizerChoice::self: return "self";
    case NormalizerChoice::Bn: return "Bn";
  }
  return "unknown";
}

// ---------------------------------------------------------------- weights

WeightArray TriangularRow::build(std::int64_t n) const {
  if (n < 1) throw ConfigError("triangular row needs n >= 1");
  WeightArray w;
  w.origin = 1;
  const auto count = static_cast<std::size_t>(n);
  const double nd = static_cast<double>(n);
  switch (kind) {
    case Kind::equal:
      w.entries.assign(count, 1.0);
      w.meta = "triangular:equal n=" + std::to_string(n);
      break;
    case Kind::regression:
      w.entries.resize(count);
      for (std::size_t k = 0; k < count; ++k) {
        w.entries[k] = (static_cast<double>(k + 1) - (nd + 1.0) / 2.0) / nd;
      }
      w.meta = "triangular:regression n=" + std::to_string(n);
      break;
    case Kind::power:
      w.entries.resize(count);
      for (std::size_t k = 0; k < count; ++k) {
        w.entries[k] = std::pow(static_cast<double>(k + 1), -gamma);
      }
      w.meta = "triangular:power gamma=" + format_double(gamma) + " n=" + std::to_string(n);
      break;
    case Kind::explicit_values:
      if (values.size() != count) {
        throw ConfigError("explicit row has " + std::to_string(values.size()) +
                          " values but n = " + std::to_string(n));
      }
      w.entries = values;
      w.meta = "triangular:explicit n=" + std::to_string(n);
      break;
  }
  return w;
}

// ---------------------------------------------------------------- config I/O

namespace {

void require_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                  std::string_view where) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

double get_number(const json& obj, const char* key, std::string_view where) {
  if (!obj.contains(key)) throw ConfigError(std::string(where) + ": missing '" + key + "'");
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(std::string(where) + ": '" + key + "' must be a number");
  return v.get<double>();
}

std::vector<double> get_values(const json& obj, std::string_view where) {
  if (!obj.contains("values") || !obj.at("values").is_array() || obj.at("values").empty()) {
    throw ConfigError(std::string(where) + ": 'values' must be a nonempty array");
  }
  std::vector<double> out;
  for (const auto& v : obj.at("values")) {
    if (!v.is_number()) throw ConfigError(std::string(where) + ": 'values' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

CoefficientSpec spec_from_json(const json& j) {
  constexpr std::string_view where = "weights.spec";
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw ConfigError("weights.spec: needs a string 'kind'");
  }
  const auto kind = j.at("kind").get<std::string>();
  try {
    if (kind == "regvar") {
      require_keys(j, {"kind", "alpha", "L"}, where);
      SlowlyVarying L;
      if (j.contains("L")) {
        const json& l = j.at("L");
        require_keys(l, {"constant", "log_power"}, "weights.spec.L");
        if (l.contains("constant")) L.constant = get_number(l, "constant", "weights.spec.L");
        if (l.contains("log_power")) L.log_power = get_number(l, "log_power", "weights.spec.L");
        if (!(L.constant > 0.0)) throw ConfigError("weights.spec.L: constant must be positive");
      }
      return CoefficientSpec::regvar(get_number(j, "alpha", where), L);
    }
    if (kind == "fractional") {
      require_keys(j, {"kind", "d"}, where);
      return CoefficientSpec::fractional(get_number(j, "d", where));
    }
    if (kind == "explicit") {
      require_keys(j, {"kind", "values", "first_lag"}, where);
      std::int64_t first = 1;
      if (j.contains("first_lag")) {
        if (!j.at("first_lag").is_number_integer()) {
          throw ConfigError("weights.spec: 'first_lag' must be an integer");
        }
        first = j.at("first_lag").get<std::int64_t>();
      }
      return CoefficientSpec::explicit_list(get_values(j, where), first);
    }
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("weights.spec: ") + e.what());
  }
  throw ConfigError("weights.spec: unknown kind '" + kind + "'");
}

json spec_to_json(const CoefficientSpec& s) {
  switch (s.kind()) {
    case CoefficientSpec::Kind::regvar:
      return {{"kind", "regvar"},
              {"alpha", s.alpha()},
              {"L", {{"constant", s.slowly_varying().constant},
                     {"log_power", s.slowly_varying().log_power}}}};
    case CoefficientSpec::Kind::fractional:
      return {{"kind", "fractional"}, {"d", s.d()}};
    case CoefficientSpec::Kind::explicit_list: {
      const auto v = s.values();
      return {{"kind", "explicit"},
              {"values", std::vector<double>(v.begin(), v.end())},
              {"first_lag", s.first_lag()}};
    }
  }
  return {};
}

json weights_to_json(const WeightSource& w) {
  if (w.kind == WeightSource::Kind::linear) return {{"type", "linear"}, {"spec", spec_to_json(*w.spec)}};
  switch (w.row.kind) {
    case TriangularRow::Kind::equal: return {{"type", "equal"}};
    case TriangularRow::Kind::regression: return {{"type", "regression"}};
    case TriangularRow::Kind::power: return {{"type", "power"}, {"gamma", w.row.gamma}};
    case TriangularRow::Kind::explicit_values:
      return {{"type", "explicit"}, {"values", w.row.values}};
  }
  return {};
}

json config_to_json(const ExperimentConfig& c) {
  json checks = json::array();
  if (c.checks.gen) checks.push_back("gen");
  if (c.checks.coeffD) checks.push_back("coeffD");
  if (c.checks.coeff0) checks.push_back("coeff0");
  if (c.checks.M1) checks.push_back("M1");
  // Output location is deliberately left out: it does not change results.
  return {{"model", c.model},
          {"weights", weights_to_json(c.weights)},
          {"n", c.n_list},
          {"innovations", {{"flavor", std::string(to_string(c.innovations.flavor))},
                           {"m", c.innovations.m}}},
          {"replications", c.replications},
          {"seed", c.seed},
          {"normalizer", std::string(to_string(c.normalizer))},
          {"epsilon_tail", c.window.eps_tail},
          {"max_window", c.window.max_window},
          {"checks", checks},
          {"m1_samples", c.checks.m1_samples},
          {"hist_bins", c.hist_bins}};
}

std::uint64_t get_count(const json& j, const char* key, std::uint64_t min_value) {
  const json& v = j.at(key);
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw ConfigError(std::string("'") + key + "' must be a non-negative integer");
  }
  const auto out = v.get<std::uint64_t>();
  if (out < min_value) {
    throw ConfigError(std::string("'") + key + "' must be >= " + std::to_string(min_value));
  }
  return out;
}

}  // namespace

std::string ExperimentConfig::canonical_json() const { return config_to_json(*this).dump(); }

CoefficientSpec parse_coefficient_spec(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("spec: malformed JSON: ") + e.what());
  }
  return spec_from_json(j);
}

ExperimentConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  require_keys(j,
               {"model", "weights", "n", "innovations", "replications", "seed", "normalizer",
                "epsilon_tail", "max_window", "checks", "m1_samples", "output", "hist_bins"},
               "config");

  ExperimentConfig c;
  try {
    if (j.contains("model")) {
      const json& m = j.at("model");
      if (m.is_string()) {
        c.model = m.get<std::string>();
      } else {
        require_keys(m, {"name", "params"}, "model");
        if (!m.contains("name") || !m.at("name").is_string()) {
          throw ConfigError("model: needs a string 'name'");
        }
        c.model = m.at("name").get<std::string>();
        if (m.contains("params") && !(m.at("params").is_object() && m.at("params").empty())) {
          throw ConfigError("model: the built-in models take no parameters");
        }
      }
    }
    try {
      (void)TailModel::from_name(c.model);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("model: ") + e.what());
    }

    if (!j.contains("weights")) throw ConfigError("config: missing 'weights'");
    const json& w = j.at("weights");
    if (!w.is_object() || !w.contains("type") || !w.at("type").is_string()) {
      throw ConfigError("weights: needs a string 'type'");
    }
    const auto type = w.at("type").get<std::string>();
    if (type == "equal") {
      require_keys(w, {"type"}, "weights");
      c.weights.row.kind = TriangularRow::Kind::equal;
    } else if (type == "regression") {
      require_keys(w, {"type"}, "weights");
      c.weights.row.kind = TriangularRow::Kind::regression;
    } else if (type == "power") {
      require_keys(w, {"type", "gamma"}, "weights");
      c.weights.row.kind = TriangularRow::Kind::power;
      c.weights.row.gamma = get_number(w, "gamma", "weights");
      if (!(c.weights.row.gamma >= 0.0 && c.weights.row.gamma < 0.5)) {
        throw ConfigError("weights: power gamma must lie in [0, 1/2)");
      }
    } else if (type == "explicit") {
      require_keys(w, {"type", "values"}, "weights");
      c.weights.row.kind = TriangularRow::Kind::explicit_values;
      c.weights.row.values = get_values(w, "weights");
    } else if (type == "linear") {
      require_keys(w, {"type", "spec"}, "weights");
      if (!w.contains("spec")) throw ConfigError("weights: linear source needs 'spec'");
      c.weights.kind = WeightSource::Kind::linear;
      c.weights.spec = spec_from_json(w.at("spec"));
    } else {
      throw ConfigError("weights: unknown type '" + type + "'");
    }

    if (j.contains("n")) {
      const json& n = j.at("n");
      auto push = [&](const json& v) {
        if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
          throw ConfigError("n: entries must be positive integers");
        }
        c.n_list.push_back(v.get<std::int64_t>());
      };
      if (n.is_array()) {
        for (const auto& v : n) push(v);
      } else {
        push(n);
      }
    } else if (c.weights.kind == WeightSource::Kind::triangular &&
               c.weights.row.kind == TriangularRow::Kind::explicit_values) {
      c.n_list.push_back(static_cast<std::int64_t>(c.weights.row.values.size()));
    }
    if (c.n_list.empty()) throw ConfigError("n: list must be nonempty");
    if (c.weights.kind == WeightSource::Kind::triangular &&
        c.weights.row.kind == TriangularRow::Kind::explicit_values) {
      for (auto n : c.n_list) {
        if (n != static_cast<std::int64_t>(c.weights.row.values.size())) {
          throw ConfigError("n: an explicit row fixes n to its length");
        }
      }
    }

    if (j.contains("innovations")) {
      const json& in = j.at("innovations");
      if (in.is_string()) {
        c.innovations.flavor = flavor_from_string(in.get<std::string>());
      } else {
        require_keys(in, {"flavor", "m"}, "innovations");
        if (!in.contains("flavor") || !in.at("flavor").is_string()) {
          throw ConfigError("innovations: needs a string 'flavor'");
        }
        c.innovations.flavor = flavor_from_string(in.at("flavor").get<std::string>());
        if (in.contains("m")) {
          if (!in.at("m").is_number_integer() || in.at("m").get<std::int64_t>() < 1) {
            throw ConfigError("innovations: 'm' must be a positive integer");
          }
          c.innovations.m = in.at("m").get<int>();
        }
      }
    }

    if (j.contains("replications")) c.replications = get_count(j, "replications", 1);
    if (j.contains("seed")) c.seed = get_count(j, "seed", 0);
    if (j.contains("normalizer")) {
      const json& v = j.at("normalizer");
      const std::string name = v.is_string() ? v.get<std::string>() : std::string();
      if (name == "Dn") c.normalizer = NormalizerChoice::Dn;
      else if (name == "self") c.normalizer = NormalizerChoice::self;
      else if (name == "Bn") c.normalizer = NormalizerChoice::Bn;
      else throw ConfigError("normalizer: must be one of Dn, self, Bn");
    }
    if (j.contains("epsilon_tail")) {
      c.window.eps_tail = get_number(j, "epsilon_tail", "config");
      if (!(c.window.eps_tail > 0.0 && c.window.eps_tail < 1.0)) {
        throw ConfigError("epsilon_tail: must lie in (0, 1)");
      }
    }
    if (j.contains("max_window")) {
      c.window.max_window = static_cast<std::int64_t>(get_count(j, "max_window", 1));
    }
    if (j.contains("checks")) {
      const json& ch = j.at("checks");
      if (!ch.is_array()) throw ConfigError("checks: expected an array of names");
      for (const auto& v : ch) {
        const std::string name = v.is_string() ? v.get<std::string>() : std::string();
        if (name == "gen") c.checks.gen = true;
        else if (name == "coeffD") c.checks.coeffD = true;
        else if (name == "coeff0") c.checks.coeff0 = true;
        else if (name == "M1") c.checks.M1 = true;
        else throw ConfigError("checks: unknown check '" + name + "'");
      }
    }
    if (j.contains("m1_samples")) c.checks.m1_samples = get_count(j, "m1_samples", 100);
    if (j.contains("hist_bins")) c.hist_bins = get_count(j, "hist_bins", 0);
    if (j.contains("output")) {
      const json& o = j.at("output");
      require_keys(o, {"dir", "prefix"}, "output");
      if (o.contains("dir")) {
        if (!o.at("dir").is_string()) throw ConfigError("output: 'dir' must be a string");
        c.out_dir = o.at("dir").get<std::string>();
      }
      if (o.contains("prefix")) {
        if (!o.at("prefix").is_string() || o.at("prefix").get<std::string>().empty()) {
          throw ConfigError("output: 'prefix' must be a nonempty string");
        }
        c.prefix = o.at("prefix").get<std::string>();
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------- running

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("HEAVYTAIL_THREADS")) {
    unsigned v = 0;
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size() && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::uint64_t seed_for_n(std::uint64_t master, std::int64_t n) noexcept {
  return mix_stream(master, static_cast<std::uint64_t>(n));
}

PreparedN prepare_n(const ExperimentConfig& config, std::int64_t n) {
  const TailModel model = config.tail_model();
  PreparedN p;
  p.n = n;
  if (config.weights.kind == WeightSource::Kind::linear) {
    p.plan.emplace(*config.weights.spec, n, model, config.window);
  } else {
    p.row = config.weights.row.build(n);
  }
  p.Dn = solve_Dn(p.weights().entries, model);
  return p;
}

void gate_linear(const ExperimentConfig& config, const RunOptions& opts) {
  if (config.weights.kind != WeightSource::Kind::linear) return;
  const TailModel model = config.tail_model();
  const Coeff0Check c = opts.coeff0 ? opts.coeff0(*config.weights.spec, model)
                                    : check_coeff0(*config.weights.spec, model);
  if (!c.converges) {
    throw ConditionError("linear process refused: sum a_j^2 H(1/|a_j|) is not certified finite (" +
                         config.weights.spec->describe() + ", partial " +
                         format_double(c.partial) + ", tail bound " +
                         format_double(c.tail_bound) + ")");
  }
}

ConditionResults run_checks(const ExperimentConfig& config, const PreparedN& prepared,
                            const RunOptions& opts) {
  const TailModel model = config.tail_model();
  const auto& w = prepared.weights().entries;
  ConditionResults r;
  if (config.checks.gen) r.gen = check_gen(w, model);
  if (config.checks.coeffD) r.coeffD = check_coeffD(w, model, prepared.Dn.D);
  if (config.checks.coeff0 && config.weights.kind == WeightSource::Kind::linear) {
    r.coeff0 = opts.coeff0 ? opts.coeff0(*config.weights.spec, model)
                           : check_coeff0(*config.weights.spec, model);
  }
  if (config.checks.M1) {
    // Dedicated stream id, disjoint from the replicate ids 0..R-1.
    constexpr std::uint64_t kCheckStream = std::uint64_t{1} << 63;
    const std::uint64_t seed = seed_for_n(config.seed, prepared.n);
    const int lags[] = {1, 2, 3};
    const std::pair<double, double> truncs[] = {{10.0, 10.0}, {100.0, 100.0}, {10.0, 1000.0}};
    {
      InnovationStream s(model, config.innovations, seed, kCheckStream);
      r.m1 = check_M1(s, lags, truncs, config.checks.m1_samples);
    }
    {
      InnovationStream s(model, config.innovations, seed, kCheckStream + 1);
      r.rho_lag1 = estimate_rho_canonical(s, config.checks.m1_samples, 1);
    }
    if (config.innovations.flavor == Flavor::m_dependent) {
      InnovationStream s(model, config.innovations, seed, kCheckStream + 2);
      r.rho_beyond_m = estimate_rho_canonical(s, config.checks.m1_samples, config.innovations.m + 1);
    }
  }
  return r;
}

namespace {

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned t = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (t <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(t);
    for (unsigned k = 0; k < t; ++k) pool.emplace_back(worker);
  }
  // Report the failure of the lowest index so errors are reproducible too.
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

NResult run_one_n(const ExperimentConfig& config, const RunOptions& opts, unsigned threads,
                  std::int64_t n) {
  const TailModel model = config.tail_model();
  const PreparedN prep = prepare_n(config, n);
  NResult res;
  res.n = n;
  res.seed = seed_for_n(config.seed, n);
  res.Dn = prep.Dn;
  const double D = prep.Dn.D;

  res.reps.resize(config.replications);
  parallel_for(config.replications, threads, [&](std::size_t rep) {
    InnovationStream stream(model, config.innovations, res.seed, rep);
    PathStatistics ps;
    if (opts.replicate) {
      ps = opts.replicate(n, rep, stream);
    } else if (prep.plan) {
      ps = linear_process_path(*prep.plan, stream, D);
    } else {
      ps = weighted_sum(prep.row, stream, D);
    }
    ps.n = n;
    res.reps[rep] = std::move(ps);
  });

  std::vector<double> S(res.reps.size());
  for (std::size_t i = 0; i < S.size(); ++i) S[i] = res.reps[i].S;
  if (config.normalizer == NormalizerChoice::Bn) res.Bn = estimate_Bn(S);

  switch (config.normalizer) {
    case NormalizerChoice::Dn: res.statistic = "T_D"; break;
    case NormalizerChoice::self: res.statistic = "T_self"; break;
    case NormalizerChoice::Bn: res.statistic = "T_Bn"; break;
  }
  for (const auto& ps : res.reps) {
    double v = PathStatistics::kNaN;
    switch (config.normalizer) {
      case NormalizerChoice::Dn: v = ps.T_D; break;
      case NormalizerChoice::self: v = ps.T_self; break;
      case NormalizerChoice::Bn:
        if (res.Bn->value > 0.0) v = ps.S / res.Bn->value;
        break;
    }
    if (std::isnan(v)) {
      ++res.undefined_count;
    } else {
      res.scored.push_back(v);
    }
  }
  if (!res.scored.empty()) {
    res.ks = ks_normal(res.scored);
    res.cvm = cvm_normal(res.scored);
    res.ks_critical = ks_critical_95(res.scored.size());
    res.summary = summarize(res.scored);
  } else {
    res.ks = res.cvm = res.ks_critical = PathStatistics::kNaN;
  }

  std::vector<double> lln;
  for (const auto& ps : res.reps) {
    if (!std::isnan(ps.ratio_LLN)) lln.push_back(ps.ratio_LLN);
  }
  if (!lln.empty()) res.lln = summarize(lln);

  if (prep.plan) {
    WindowInfo wi;
    const WeightArray& w = prep.plan->window();
    wi.origin = w.origin;
    wi.last = w.last_index();
    wi.size = w.size();
    wi.truncation_tail_bound = w.truncation_tail_bound;
    wi.convolution = std::string(to_string(prep.plan->method()));
    for (const auto& ps : res.reps) {
      wi.max_representation_gap = std::max(wi.max_representation_gap, ps.representation_gap);
    }
    res.window = wi;

    const CoefficientSpec& spec = *config.weights.spec;
    if (spec.finite()) {
      res.kulik_target_var = kulik_target_variance(spec);
      std::vector<double> t;
      std::vector<double> scaled;
      for (const auto& ps : res.reps) {
        if (!(ps.V_path > 0.0)) continue;
        const double v = kulik_statistic(ps, spec).T_kulik;
        t.push_back(v);
        scaled.push_back(v / std::sqrt(*res.kulik_target_var));
      }
      if (!t.empty()) {
        res.kulik = summarize(t);
        res.kulik_ks = ks_normal(scaled);
      }
    } else if (spec.kind() == CoefficientSpec::Kind::regvar) {
      const auto k = PeligradSangConstants::compute(spec, n);
      std::vector<double> r;
      for (const auto& ps : res.reps) {
        if (ps.V_path > 0.0) r.push_back(peligrad_sang_ratio(ps, k));
      }
      if (!r.empty()) res.peligrad_sang = summarize(r);
    }
  }

  res.checks = run_checks(config, prep, opts);
  return res;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config, const RunOptions& opts) {
  if (config.replications < 1) throw ConfigError("replications must be >= 1");
  if (config.n_list.empty()) throw ConfigError("n list must be nonempty");
  if (config.weights.kind == WeightSource::Kind::linear && !config.weights.spec) {
    throw ConfigError("linear weight source without a coefficient spec");
  }
  gate_linear(config, opts);
  const unsigned threads = resolve_threads(opts.threads);
  ExperimentReport report;
  report.config = config;
  for (std::int64_t n : config.n_list) report.per_n.push_back(run_one_n(config, opts, threads, n));
  return report;
}

// ---------------------------------------------------------------- output

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

std::string replicates_csv(const NResult& result) {
  std::string out(kCsvHeader);
  out += '\n';
  for (std::size_t i = 0; i < result.reps.size(); ++i) {
    const auto& p = result.reps[i];
    out += std::to_string(i);
    for (double v : {p.S, p.V_raikov, p.V_path, p.T_D, p.T_self, p.ratio_LLN}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::string histogram_csv(const NResult& result, std::size_t bins) {
  std::string out = "bin_center,count\n";
  if (result.scored.empty()) return out;
  for (const auto& b : histogram(result.scored, bins)) {
    out += format_double(0.5 * (b.lo + b.hi));
    out += ',';
    out += std::to_string(b.count);
    out += '\n';
  }
  return out;
}

namespace {

json summary_json(const Summary& s) {
  return {{"count", s.count}, {"mean", s.mean},     {"variance", s.variance},
          {"sd", s.sd},       {"min", s.min},       {"q25", s.q25},
          {"median", s.median}, {"q75", s.q75},     {"max", s.max}};
}

json checks_json(const ConditionResults& c) {
  json j = json::object();
  if (c.gen) j["gen"] = {{"sum_cond", c.gen->sum_cond}, {"max_cond", c.gen->max_cond}};
  if (c.coeffD) j["coeffD"] = *c.coeffD;
  if (c.coeff0) {
    j["coeff0"] = {{"converges", c.coeff0->converges},
                   {"partial", c.coeff0->partial},
                   {"tail_bound", c.coeff0->tail_bound}};
  }
  if (!c.m1.empty()) {
    json rows = json::array();
    for (const auto& r : c.m1) {
      rows.push_back({{"lag", r.lag},
                      {"a", r.a},
                      {"b", r.b},
                      {"normalized_cov", r.normalized_cov},
                      {"std_error", r.std_error}});
    }
    j["M1"] = rows;
  }
  if (c.rho_lag1) j["rho_lag1"] = *c.rho_lag1;
  if (c.rho_beyond_m) j["rho_beyond_m"] = *c.rho_beyond_m;
  return j;
}

}  // namespace

std::string report_json(const ExperimentReport& report) {
  json per_n = json::array();
  for (const auto& r : report.per_n) {
    json e;
    e["n"] = r.n;
    e["seed"] = r.seed;
    e["statistic"] = r.statistic;
    e["replications"] = r.reps.size();
    e["undefined_count"] = r.undefined_count;
    e["ks"] = r.ks;
    e["cvm"] = r.cvm;
    e["ks_critical_95"] = r.ks_critical;
    e["normal_at_95"] = !r.scored.empty() && r.ks <= r.ks_critical;
    if (!r.scored.empty()) e["summary"] = summary_json(r.summary);
    json norm = {{"Dn", r.Dn.D},
                 {"Dn_method", std::string(to_string(r.Dn.method))},
                 {"Dn_residual", r.Dn.residual},
                 {"Dn_lower_bound_check", r.Dn.lower_bound_check}};
    if (r.Bn) {
      norm["Bn"] = r.Bn->value;
      norm["Bn_std_error"] = r.Bn->std_error;
      norm["Bn_over_Dn"] = r.Bn->value / r.Dn.D;
    }
    e["normalizer"] = norm;
    if (r.lln) e["ratio_LLN"] = summary_json(*r.lln);
    if (r.window) {
      e["window"] = {{"origin", r.window->origin},
                     {"last", r.window->last},
                     {"size", r.window->size},
                     {"truncation_tail_bound", r.window->truncation_tail_bound},
                     {"convolution", r.window->convolution},
                     {"max_representation_gap", r.window->max_representation_gap}};
    }
    if (r.kulik_target_var) {
      json k = {{"target_var", *r.kulik_target_var}};
      if (r.kulik) k["T_kulik"] = summary_json(*r.kulik);
      if (r.kulik_ks) k["ks_scaled"] = *r.kulik_ks;
      e["kulik"] = k;
    }
    if (r.peligrad_sang) e["peligrad_sang"] = summary_json(*r.peligrad_sang);
    e["checks"] = checks_json(r.checks);
    per_n.push_back(std::move(e));
  }
  json seeds = json::object();
  for (const auto& r : report.per_n) seeds[std::to_string(r.n)] = r.seed;
  json out = {{"provenance", {{"version", std::string(kVersion)},
                              {"master_seed", report.config.seed},
                              {"seeds", seeds},
                              {"config", json::parse(report.config.canonical_json())}}},
              {"results", per_n}};
  return out.dump(2) + "\n";
}

std::vector<std::filesystem::path> write_outputs(const ExperimentReport& report) {
  namespace fs = std::filesystem;
  const fs::path dir(report.config.out_dir);
  const std::string& prefix = report.config.prefix;
  std::vector<std::pair<fs::path, std::string>> files;
  for (const auto& r : report.per_n) {
    const std::string stem = prefix + "_n" + std::to_string(r.n);
    files.emplace_back(dir / (stem + ".csv"), replicates_csv(r));
    if (report.config.hist_bins > 0) {
      files.emplace_back(dir / (stem + "_hist.csv"), histogram_csv(r, report.config.hist_bins));
    }
  }
  files.emplace_back(dir / (prefix + "_report.json"), report_json(report));

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());

  for (const auto& f : files) {
    if (fs::is_directory(f.first)) {
      throw std::runtime_error("output path '" + f.first.string() + "' is a directory");
    }
  }

  std::vector<fs::path> temps;
  std::size_t renamed = 0;
  auto cleanup = [&] {
    for (const auto& t : temps) fs::remove(t, ec);
    for (std::size_t i = 0; i < renamed; ++i) fs::remove(files[i].first, ec);
  };
  try {
    for (const auto& [path, content] : files) {
      fs::path tmp = path;
      tmp += ".partial";
      temps.push_back(tmp);
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out.write(content.data(), static_cast<std::streamsize>(content.size()));
      out.close();
      if (!out) throw std::runtime_error("failed writing '" + tmp.string() + "'");
    }
    for (; renamed < files.size(); ++renamed) fs::rename(temps[renamed], files[renamed].first);
  } catch (...) {
    cleanup();
    throw;
  }
  std::vector<fs::path> out;
  for (const auto& f : files) out.push_back(f.first);
  return out;
}

}  // namespace heavytail
