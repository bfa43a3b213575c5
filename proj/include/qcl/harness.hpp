#pragma once

#include "qcl/io.hpp"

#include <map>
#include <optional>

namespace qcl {

enum class ExperimentKind {
  OptimizeBatch,
  SingularSearch,
  FixScan,
  Cascade,
  LarcCensus,
};
const char* to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

// Per-run seeds derive from the master seed and the (system, seed) indices by
// two rounds of splitmix64; documented so external tooling can reproduce any
// single run in isolation.
std::uint64_t splitmix64(std::uint64_t state);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t system_index,
                          std::uint64_t seed_index);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::OptimizeBatch;
  int n = 2;
  double T = 10.0;
  int p = 100;
  double kappa = 2.0;
  int num_systems = 1;
  int num_seeds_per_system = 1;
  std::string objective_kind = "J2_gate";
  std::string objective_target = "random";  // or "identity"
  double system_norm_bound = 1.0;
  double initial_field_scale = 0.5;  // × κ for random starting coefficients
  AscentOptions optimizer;
  SearchOptions search;
  Tolerances tolerances;
  std::uint64_t master_seed = 1;
  std::string output_json;
  std::string output_csv;
  // fix_scan / cascade specifics
  int fix_generator = 0;
  int fix_piece = 0;
  int scan_values = 101;
};

ExperimentConfig config_from_json(const Json& j);
Json to_json(const ExperimentConfig& config);

// Bundled configurations behind the `reproduce` subcommand.
//   confirmation-small — 10 random four-level pairs × 10 search restarts
//   confirmation-full  — 100 × 100 restarts at 1000 pieces (long)
//   optimize-small     — 5 × 5 two-level gate optimizations
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

// One CSV row of an experiment run; also embedded in the JSON report.
struct RunSummary {
  int system_index = 0;
  int seed_index = 0;
  double final_value = 0.0;
  double normalized_value = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;
  int corank_at_final = 0;
  std::string classification;
  std::string termination;
  double wall_ms = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<RunSummary> runs;
  Json details;  // per-kind extras (search restarts, census histogram, …)
  double success_fraction = 0.0;
  int trap_candidates = 0;
  std::map<int, int> corank_histogram;
  double wall_ms_total = 0.0;
  std::string timestamp;
};

// Deterministic given config and master seed; worker count comes from the
// QCL_WORKERS environment variable (default: hardware concurrency). Writes
// the JSON/CSV outputs when paths are configured.
ExperimentReport run_experiment(const ExperimentConfig& config);

// Everything except "meta" (timestamp, wall time) is byte-stable across
// repeated runs with the same master seed.
Json to_json(const ExperimentReport& report);
std::string report_csv(const ExperimentReport& report);

}  // namespace qcl
