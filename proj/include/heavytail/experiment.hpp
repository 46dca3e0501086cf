#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "heavytail/gof.hpp"
#include "heavytail/innovations.hpp"
#include "heavytail/normalizer.hpp"
#include "heavytail/simulate.hpp"
#include "heavytail/weights.hpp"

namespace heavytail {

inline constexpr std::string_view kVersion = HEAVYTAIL_VERSION;

/// Invalid or unresolvable experiment configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A sufficient condition the experiment depends on failed; the run is refused.
class ConditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class NormalizerChoice { Dn, self, Bn };

[[nodiscard]] std::string_view to_string(NormalizerChoice c) noexcept;

/// Row c_1..c_n of a triangular array.
struct TriangularRow {
  enum class Kind { equal, regression, power, explicit_values };

  Kind kind = Kind::equal;
  double gamma = 0.25;         // power: c_k = k^{-gamma}
  std::vector<double> values;  // explicit_values

  /// equal: 1; regression: k/n - (n+1)/(2n); power: k^{-gamma}.
  [[nodiscard]] WeightArray build(std::int64_t n) const;
};

struct WeightSource {
  enum class Kind { triangular, linear };

  Kind kind = Kind::triangular;
  TriangularRow row;
  std::optional<CoefficientSpec> spec;  // linear
};

struct ConditionChecks {
  bool gen = false;
  bool coeffD = false;
  bool coeff0 = false;
  bool M1 = false;
  std::size_t m1_samples = 100'000;
};

struct ExperimentConfig {
  std::string model = "pareto2";
  WeightSource weights;
  std::vector<std::int64_t> n_list;
  InnovationConfig innovations;
  std::size_t replications = 1000;
  std::uint64_t seed = 1;
  NormalizerChoice normalizer = NormalizerChoice::self;
  WindowOptions window;
  ConditionChecks checks;
  std::string out_dir = ".";
  std::string prefix = "experiment";
  std::size_t hist_bins = 0;

  /// Normalized JSON form of the configuration (reflects overrides).
  [[nodiscard]] std::string canonical_json() const;
  [[nodiscard]] TailModel tail_model() const { return TailModel::from_name(model); }
};

/// Throws ConfigError on malformed JSON, unknown keys or invalid values.
[[nodiscard]] ExperimentConfig parse_config(std::string_view json_text);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

/// CoefficientSpec from its JSON form, e.g. {"kind": "regvar", "alpha": 0.75}.
[[nodiscard]] CoefficientSpec parse_coefficient_spec(std::string_view json_text);

/// Per-n condition checks. Absent members were not requested or do not apply.
struct ConditionResults {
  std::optional<GenCheck> gen;
  std::optional<double> coeffD;
  std::optional<Coeff0Check> coeff0;
  std::vector<M1Row> m1;
  std::optional<double> rho_lag1;
  std::optional<double> rho_beyond_m;  // m-dependent: lag m + 1
};

struct WindowInfo {
  std::int64_t origin = 0;
  std::int64_t last = 0;
  std::size_t size = 0;
  double truncation_tail_bound = 0.0;
  std::string convolution;
  double max_representation_gap = 0.0;
};

struct NResult {
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  std::vector<PathStatistics> reps;

  std::string statistic;         // T_D, T_self or T_Bn
  std::vector<double> scored;    // defined values in replicate order
  std::size_t undefined_count = 0;
  double ks = 0.0;
  double cvm = 0.0;
  double ks_critical = 0.0;
  Summary summary;

  NormalizerReport Dn;
  std::optional<BnEstimate> Bn;
  std::optional<Summary> lln;

  std::optional<WindowInfo> window;
  std::optional<double> kulik_target_var;
  std::optional<Summary> kulik;
  std::optional<double> kulik_ks;  // T_kulik / sqrt(target) against Phi
  std::optional<Summary> peligrad_sang;

  ConditionResults checks;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<NResult> per_n;
};

using ReplicateHook =
    std::function<PathStatistics(std::int64_t n, std::uint64_t rep, InnovationStream& stream)>;
using Coeff0Hook = std::function<Coeff0Check(const CoefficientSpec&, const TailModel&)>;

struct RunOptions {
  /// 0: HEAVYTAIL_THREADS, else hardware concurrency.
  unsigned threads = 0;
  /// Replaces the per-replicate computation (test injection).
  ReplicateHook replicate;
  /// Replaces check_coeff0 in the gating step.
  Coeff0Hook coeff0;
};

[[nodiscard]] unsigned resolve_threads(unsigned requested);

/// Seed of the replicate streams at a given n.
[[nodiscard]] std::uint64_t seed_for_n(std::uint64_t master, std::int64_t n) noexcept;

/// Weights and normalizer for one n, shared by run, normalizer and check.
struct PreparedN {
  std::int64_t n = 0;
  std::optional<LinearProcessPlan> plan;
  WeightArray row;  // triangular only
  NormalizerReport Dn;

  [[nodiscard]] const WeightArray& weights() const noexcept {
    return plan ? plan->window() : row;
  }
};

[[nodiscard]] PreparedN prepare_n(const ExperimentConfig& config, std::int64_t n);

/// Condition gating for linear processes. Throws ConditionError.
void gate_linear(const ExperimentConfig& config, const RunOptions& opts = {});

[[nodiscard]] ConditionResults run_checks(const ExperimentConfig& config, const PreparedN& prepared,
                                          const RunOptions& opts = {});

/// Deterministic in the configuration: thread count and completion order do
/// not affect any result.
[[nodiscard]] ExperimentReport run_experiment(const ExperimentConfig& config,
                                              const RunOptions& opts = {});

inline constexpr std::string_view kCsvHeader = "rep_id,S,V_raikov,V_path,T_D,T_self,ratio_LLN";

[[nodiscard]] std::string replicates_csv(const NResult& result);
[[nodiscard]] std::string histogram_csv(const NResult& result, std::size_t bins);
[[nodiscard]] std::string report_json(const ExperimentReport& report);

/// Writes every output file or none: content goes to temporaries first and
/// is renamed into place only after all writes succeed. Returns final paths.
std::vector<std::filesystem::path> write_outputs(const ExperimentReport& report);

/// Shortest round-trip decimal form ("nan", "inf", "-inf" for non-finite).
[[nodiscard]] std::string format_double(double v);

}  // namespace heavytail
