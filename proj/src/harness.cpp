#include "qcl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <random>
#include <thread>

namespace qcl {

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::OptimizeBatch:
      return "optimize_batch";
    case ExperimentKind::SingularSearch:
      return "singular_search";
    case ExperimentKind::FixScan:
      return "fix_scan";
    case ExperimentKind::Cascade:
      return "cascade";
    case ExperimentKind::LarcCensus:
      return "larc_census";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  if (name == "optimize_batch") return ExperimentKind::OptimizeBatch;
  if (name == "singular_search") return ExperimentKind::SingularSearch;
  if (name == "fix_scan") return ExperimentKind::FixScan;
  if (name == "cascade") return ExperimentKind::Cascade;
  if (name == "larc_census") return ExperimentKind::LarcCensus;
  throw ConfigError("unknown experiment kind: " + name);
}

std::uint64_t splitmix64(std::uint64_t state) {
  std::uint64_t z = state + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t system_index,
                          std::uint64_t seed_index) {
  const std::uint64_t first = splitmix64(master ^ (system_index + 1) *
                                                      0x9E3779B97F4A7C15ULL);
  return splitmix64(first ^ (seed_index + 1) * 0xBF58476D1CE4E5B9ULL);
}

ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig config;
  try {
    config.kind =
        experiment_kind_from_string(j.at("kind").get<std::string>());
    auto read = [&](const char* key, auto& slot) {
      if (j.contains(key)) {
        slot = j.at(key).get<std::decay_t<decltype(slot)>>();
      }
    };
    read("n", config.n);
    read("T", config.T);
    read("p", config.p);
    read("kappa", config.kappa);
    read("num_systems", config.num_systems);
    read("num_seeds_per_system", config.num_seeds_per_system);
    read("system_norm_bound", config.system_norm_bound);
    read("initial_field_scale", config.initial_field_scale);
    read("master_seed", config.master_seed);
    read("output_json", config.output_json);
    read("output_csv", config.output_csv);
    read("fix_generator", config.fix_generator);
    read("fix_piece", config.fix_piece);
    read("scan_values", config.scan_values);
    if (j.contains("objective")) {
      const Json& objective = j.at("objective");
      config.objective_kind = objective.value("kind", config.objective_kind);
      config.objective_target =
          objective.value("target", config.objective_target);
    }
    if (j.contains("optimizer")) {
      const Json& optimizer = j.at("optimizer");
      config.optimizer.max_iters =
          optimizer.value("max_iters", config.optimizer.max_iters);
      config.optimizer.step0 = optimizer.value("step0", config.optimizer.step0);
      config.optimizer.backtrack =
          optimizer.value("backtrack", config.optimizer.backtrack);
      config.optimizer.grad_tol =
          optimizer.value("grad_tol", config.optimizer.grad_tol);
      config.optimizer.value_tol =
          optimizer.value("value_tol", config.optimizer.value_tol);
    }
    if (j.contains("search")) {
      const Json& search = j.at("search");
      config.search.restarts = search.value("restarts", config.search.restarts);
      config.search.iters = search.value("iters", config.search.iters);
      config.search.sigma = search.value("sigma", config.search.sigma);
      config.search.eta0 = search.value("eta0", config.search.eta0);
      config.search.tau = search.value("tau", config.search.tau);
      config.search.synth_steps =
          search.value("synth_steps", config.search.synth_steps);
      config.search.project_seed =
          search.value("project_seed", config.search.project_seed);
    }
    if (j.contains("tolerances")) {
      config.tolerances = tolerances_from_json(j.at("tolerances"));
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (config.num_systems < 1) {
    throw ConfigError("config: num_systems must be >= 1");
  }
  if (config.num_seeds_per_system < 1) {
    throw ConfigError("config: num_seeds_per_system must be >= 1");
  }
  if (!(config.T > 0.0)) {
    throw ConfigError("config: T must be positive");
  }
  if (config.p < 1) {
    throw ConfigError("config: p must be >= 1");
  }
  if (!(config.kappa > 0.0)) {
    throw ConfigError("config: kappa must be positive");
  }
  return config;
}

Json to_json(const ExperimentConfig& config) {
  Json j;
  j["kind"] = to_string(config.kind);
  j["n"] = config.n;
  j["T"] = config.T;
  j["p"] = config.p;
  j["kappa"] = config.kappa;
  j["num_systems"] = config.num_systems;
  j["num_seeds_per_system"] = config.num_seeds_per_system;
  j["objective"] = {{"kind", config.objective_kind},
                    {"target", config.objective_target}};
  j["system_norm_bound"] = config.system_norm_bound;
  j["initial_field_scale"] = config.initial_field_scale;
  j["optimizer"] = {{"max_iters", config.optimizer.max_iters},
                    {"step0", config.optimizer.step0},
                    {"backtrack", config.optimizer.backtrack},
                    {"grad_tol", config.optimizer.grad_tol},
                    {"value_tol", config.optimizer.value_tol}};
  j["search"] = {{"restarts", config.search.restarts},
                 {"iters", config.search.iters},
                 {"sigma", config.search.sigma},
                 {"eta0", config.search.eta0},
                 {"tau", config.search.tau},
                 {"synth_steps", config.search.synth_steps},
                 {"project_seed", config.search.project_seed}};
  j["master_seed"] = config.master_seed;
  j["fix_generator"] = config.fix_generator;
  j["fix_piece"] = config.fix_piece;
  j["scan_values"] = config.scan_values;
  return j;
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig config;
  if (name == "confirmation-small") {
    config.kind = ExperimentKind::SingularSearch;
    config.n = 4;
    config.T = 10.0;
    config.p = 100;
    config.kappa = 1.0;
    config.num_systems = 10;
    config.num_seeds_per_system = 10;
    config.search.restarts = 10;
    config.search.iters = 40;
    config.search.synth_steps = 1000;
    config.master_seed = 20240901;
    return config;
  }
  if (name == "confirmation-full") {
    config.kind = ExperimentKind::SingularSearch;
    config.n = 4;
    config.T = 10.0;
    config.p = 1000;
    config.kappa = 1.0;
    config.num_systems = 100;
    config.num_seeds_per_system = 100;
    config.search.restarts = 100;
    config.search.iters = 60;
    config.search.synth_steps = 1000;
    config.master_seed = 20240901;
    return config;
  }
  if (name == "optimize-small") {
    config.kind = ExperimentKind::OptimizeBatch;
    config.n = 2;
    config.T = 8.0;
    config.p = 32;
    config.kappa = 2.0;
    config.num_systems = 5;
    config.num_seeds_per_system = 5;
    config.master_seed = 7;
    return config;
  }
  if (name == "larc-census") {
    config.kind = ExperimentKind::LarcCensus;
    config.n = 4;
    config.num_systems = 200;
    config.num_seeds_per_system = 1;
    config.master_seed = 11;
    return config;
  }
  throw ConfigError("unknown preset: " + name);
}

std::vector<std::string> preset_names() {
  return {"confirmation-small", "confirmation-full", "optimize-small",
          "larc-census"};
}

namespace {

int worker_count() {
  if (const char* env = std::getenv("QCL_WORKERS")) {
    const int workers = std::atoi(env);
    if (workers >= 1) {
      return workers;
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Ordered deterministic parallel map: task i writes slot i.
template <typename Task>
void parallel_for(int count, Task&& task) {
  const int workers = std::min(worker_count(), std::max(count, 1));
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) {
      task(i);
    }
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        task(i);
      }
    });
  }
  for (auto& thread : pool) {
    thread.join();
  }
}

Objective make_objective(const ExperimentConfig& config, int n,
                         std::uint64_t seed) {
  UnitaryMatrix target;
  if (config.objective_target == "random") {
    target = random_special_unitary(n, seed);
  } else if (config.objective_target == "identity") {
    target = Matrix::Identity(n, n);
  } else {
    throw ConfigError("objective target must be 'random' or 'identity'");
  }
  const ObjectiveKind kind = objective_kind_from_string(config.objective_kind);
  switch (kind) {
    case ObjectiveKind::J1Gate:
      return Objective::gate_j1(std::move(target));
    case ObjectiveKind::J2Gate:
      return Objective::gate_j2(std::move(target));
    default:
      throw ConfigError("batch experiments support gate objectives only");
  }
}

ControlSystem make_system(const ExperimentConfig& config, int system_index) {
  const std::uint64_t seed =
      derive_seed(config.master_seed, static_cast<std::uint64_t>(system_index),
                  0xA11CE5ULL);
  return random_system(config.n, seed, config.system_norm_bound, 1);
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - start)
      .count();
}

void run_optimize_batch(const ExperimentConfig& config,
                        ExperimentReport& report) {
  const int total = config.num_systems * config.num_seeds_per_system;
  report.runs.resize(static_cast<std::size_t>(total));
  std::vector<Json> run_details(static_cast<std::size_t>(total));

  parallel_for(total, [&](int index) {
    const int system_index = index / config.num_seeds_per_system;
    const int seed_index = index % config.num_seeds_per_system;
    const auto start = std::chrono::steady_clock::now();

    const ControlSystem system = make_system(config, system_index);
    const Objective objective = make_objective(
        config, config.n,
        derive_seed(config.master_seed,
                    static_cast<std::uint64_t>(system_index), 0x0B1ECULL));
    const std::uint64_t run_seed =
        derive_seed(config.master_seed, static_cast<std::uint64_t>(system_index),
                    static_cast<std::uint64_t>(seed_index));

    ControlField field0 =
        random_field(1, config.p, config.T, config.kappa, run_seed,
                     config.initial_field_scale);
    AscentOptions options = config.optimizer;
    options.seed = run_seed;
    RunRecord record = gradient_ascent(system, field0, objective, options);

    const JacobianReport jacobian =
        endpoint_jacobian(system, record.final_field, config.tolerances);
    const CriticalTag tag = classify_critical(
        system, record.final_field, objective, jacobian, config.tolerances);
    record.classification = to_string(tag);

    RunSummary summary;
    summary.system_index = system_index;
    summary.seed_index = seed_index;
    summary.final_value = record.final_value;
    summary.normalized_value = record.final_value / objective.kinematic_max();
    summary.iterations = record.iterations;
    summary.grad_norm = record.final_grad_norm;
    summary.corank_at_final = jacobian.corank;
    summary.classification = record.classification;
    summary.termination = to_string(record.termination);
    summary.wall_ms = elapsed_ms(start);
    report.runs[static_cast<std::size_t>(index)] = std::move(summary);

    Json detail;
    detail["system_index"] = system_index;
    detail["seed_index"] = seed_index;
    detail["run"] = to_json(record);
    run_details[static_cast<std::size_t>(index)] = std::move(detail);
  });

  report.details["runs"] = Json::array();
  for (auto& detail : run_details) {
    report.details["runs"].push_back(std::move(detail));
  }
}

void run_singular_search(const ExperimentConfig& config,
                         ExperimentReport& report) {
  const int total = config.num_systems;
  report.runs.resize(0);
  std::vector<Json> search_details(static_cast<std::size_t>(total));
  std::vector<std::vector<RunSummary>> summaries(
      static_cast<std::size_t>(total));

  parallel_for(total, [&](int system_index) {
    const auto start = std::chrono::steady_clock::now();
    const ControlSystem system = make_system(config, system_index);
    const Objective objective = make_objective(
        config, config.n,
        derive_seed(config.master_seed,
                    static_cast<std::uint64_t>(system_index), 0x0B1ECULL));
    SearchOptions options = config.search;
    options.restarts = config.num_seeds_per_system;
    const std::uint64_t search_seed = derive_seed(
        config.master_seed, static_cast<std::uint64_t>(system_index), 0x5EA7ULL);

    Json detail;
    detail["system_index"] = system_index;
    try {
      const SearchRecord record = singular_critical_search(
          system, objective, config.T, config.p, config.kappa, options,
          search_seed);
      detail["search"] = to_json(record);
      detail["all_rejected"] = false;
      for (std::size_t r = 0; r < record.restarts.size(); ++r) {
        const RestartRecord& run = record.restarts[r];
        RunSummary summary;
        summary.system_index = system_index;
        summary.seed_index = static_cast<int>(r);
        summary.final_value = run.best_value;
        summary.normalized_value =
            run.xi_norm > 0.0 ? run.best_value / run.xi_norm : 0.0;
        summary.iterations = run.iterations;
        summary.grad_norm = run.final_grad_norm;
        summary.corank_at_final = run.final_corank;
        summary.classification =
            run.verified ? "verified_singular_critical"
                         : (run.feasible ? "unverified" : "rejected");
        summary.termination = run.converged ? "converged" : "max_iters";
        summaries[static_cast<std::size_t>(system_index)].push_back(
            std::move(summary));
      }
    } catch (const AllRejected&) {
      detail["all_rejected"] = true;
      RunSummary summary;
      summary.system_index = system_index;
      summary.classification = "all_rejected";
      summary.termination = "rejected";
      summaries[static_cast<std::size_t>(system_index)].push_back(
          std::move(summary));
    }
    const double wall = elapsed_ms(start);
    for (auto& summary : summaries[static_cast<std::size_t>(system_index)]) {
      summary.wall_ms = wall;
    }
    search_details[static_cast<std::size_t>(system_index)] = std::move(detail);
  });

  for (auto& block : summaries) {
    for (auto& summary : block) {
      report.runs.push_back(std::move(summary));
    }
  }
  report.details["searches"] = Json::array();
  for (auto& detail : search_details) {
    report.details["searches"].push_back(std::move(detail));
  }
}

void run_larc_census(const ExperimentConfig& config,
                     ExperimentReport& report) {
  const int total = config.num_systems;
  report.runs.resize(static_cast<std::size_t>(total));
  std::vector<int> dims(static_cast<std::size_t>(total), 0);

  parallel_for(total, [&](int system_index) {
    const auto start = std::chrono::steady_clock::now();
    const ControlSystem system = make_system(config, system_index);
    const int dim = larc_dimension(system, config.tolerances.larc_growth);
    dims[static_cast<std::size_t>(system_index)] = dim;

    RunSummary summary;
    summary.system_index = system_index;
    summary.final_value = dim;
    summary.normalized_value =
        static_cast<double>(dim) / (config.n * config.n - 1);
    summary.classification =
        dim == config.n * config.n - 1 ? "controllable" : "not_controllable";
    summary.termination = "done";
    summary.wall_ms = elapsed_ms(start);
    report.runs[static_cast<std::size_t>(system_index)] = std::move(summary);
  });

  std::map<int, int> histogram;
  for (int dim : dims) {
    ++histogram[dim];
  }
  Json histogram_json = Json::object();
  for (const auto& [dim, count] : histogram) {
    histogram_json[std::to_string(dim)] = count;
  }
  report.details["larc_histogram"] = std::move(histogram_json);
}

void run_fix_scan(const ExperimentConfig& config, ExperimentReport& report) {
  const std::uint64_t base_seed =
      derive_seed(config.master_seed, 0, 0xF1C5ULL);
  ControlSystem system = fully_actuated_system(config.n);
  system.drift = random_element(config.n, base_seed, config.system_norm_bound);
  const ControlField field =
      random_field(static_cast<int>(system.generators.size()), config.p,
                   config.T, config.kappa, base_seed + 1, 1.0);
  const Objective objective =
      make_objective(config, config.n, base_seed + 2);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(config.scan_values));
  for (int i = 0; i < config.scan_values; ++i) {
    const double alpha =
        config.scan_values == 1
            ? 0.5
            : static_cast<double>(i) / (config.scan_values - 1);
    values.push_back(-config.kappa + 2.0 * config.kappa * alpha);
  }
  const std::vector<ScanPoint> points =
      fix_parameter_scan(system, field, config.fix_generator, config.fix_piece,
                         values, &objective, config.tolerances);
  report.details["scan"] = scan_to_json(points);
  for (std::size_t i = 0; i < points.size(); ++i) {
    RunSummary summary;
    summary.system_index = 0;
    summary.seed_index = static_cast<int>(i);
    summary.final_value = points[i].value;
    summary.corank_at_final = points[i].corank;
    summary.normalized_value = points[i].residual;
    summary.classification = points[i].corank == 0 ? "full_rank" : "singular";
    summary.termination = "done";
    report.runs.push_back(std::move(summary));
  }
}

void run_cascade(const ExperimentConfig& config, ExperimentReport& report) {
  const std::uint64_t base_seed =
      derive_seed(config.master_seed, 0, 0xCA5CULL);
  ControlSystem system = fully_actuated_system(config.n);
  system.drift = random_element(config.n, base_seed, config.system_norm_bound);
  const ControlField field =
      random_field(static_cast<int>(system.generators.size()), config.p,
                   config.T, config.kappa, base_seed + 1, 1.0);
  const Objective objective = make_objective(config, config.n, base_seed + 2);

  // Fix parameters in a seeded random order down to a single free one.
  std::mt19937_64 rng(base_seed + 3);
  std::vector<CascadeFix> fixes;
  const int num_gen = static_cast<int>(system.generators.size());
  for (int j = 0; j < num_gen; ++j) {
    for (int k = 0; k < config.p; ++k) {
      fixes.push_back({j, k, 0.0});
    }
  }
  std::shuffle(fixes.begin(), fixes.end(), rng);
  fixes.pop_back();  // leave one parameter free
  std::uniform_real_distribution<double> uniform(-config.kappa, config.kappa);
  for (auto& fix : fixes) {
    fix.value = uniform(rng);
  }
  const CascadeReport cascade =
      restriction_cascade(system, field, fixes, &objective, config.tolerances);
  report.details["cascade"] = to_json(cascade);
  for (std::size_t i = 0; i < cascade.steps.size(); ++i) {
    const CascadeStep& step = cascade.steps[i];
    RunSummary summary;
    summary.system_index = 0;
    summary.seed_index = static_cast<int>(i);
    summary.final_value = step.fix.value;
    summary.corank_at_final = step.corank;
    summary.normalized_value = step.residual;
    summary.classification =
        step.transversality_failed ? "transversality_failed" : "transverse";
    summary.termination = "done";
    report.runs.push_back(std::move(summary));
  }
}

std::string iso_timestamp() {
  const std::time_t now = std::time(nullptr);
  char buffer[32];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buffer;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.config = config;
  report.details = Json::object();

  switch (config.kind) {
    case ExperimentKind::OptimizeBatch:
      run_optimize_batch(config, report);
      break;
    case ExperimentKind::SingularSearch:
      run_singular_search(config, report);
      break;
    case ExperimentKind::LarcCensus:
      run_larc_census(config, report);
      break;
    case ExperimentKind::FixScan:
      run_fix_scan(config, report);
      break;
    case ExperimentKind::Cascade:
      run_cascade(config, report);
      break;
  }

  int successes = 0;
  for (const RunSummary& run : report.runs) {
    if (run.normalized_value >= 0.999) {
      ++successes;
    }
    if (run.classification == "second_order_critical") {
      ++report.trap_candidates;
    }
    ++report.corank_histogram[run.corank_at_final];
  }
  report.success_fraction =
      report.runs.empty()
          ? 0.0
          : static_cast<double>(successes) / report.runs.size();
  report.wall_ms_total = elapsed_ms(start);
  report.timestamp = iso_timestamp();

  if (!config.output_json.empty()) {
    write_text_file(config.output_json, to_json(report).dump(2) + "\n");
  }
  if (!config.output_csv.empty()) {
    write_text_file(config.output_csv, report_csv(report));
  }
  return report;
}

Json to_json(const ExperimentReport& report) {
  Json j;
  j["meta"] = {{"timestamp", report.timestamp},
               {"wall_ms", report.wall_ms_total},
               {"version", "0.1.0"}};
  j["config"] = to_json(report.config);
  j["tolerances"] = to_json(report.config.tolerances);
  Json runs = Json::array();
  for (const RunSummary& run : report.runs) {
    runs.push_back({{"system_index", run.system_index},
                    {"seed_index", run.seed_index},
                    {"final_value", run.final_value},
                    {"normalized_value", run.normalized_value},
                    {"iterations", run.iterations},
                    {"grad_norm", run.grad_norm},
                    {"corank_at_final", run.corank_at_final},
                    {"classification", run.classification},
                    {"termination", run.termination}});
  }
  j["runs"] = std::move(runs);
  Json histogram = Json::object();
  for (const auto& [corank, count] : report.corank_histogram) {
    histogram[std::to_string(corank)] = count;
  }
  j["aggregate"] = {{"num_runs", report.runs.size()},
                    {"success_fraction", report.success_fraction},
                    {"trap_candidates", report.trap_candidates},
                    {"corank_histogram", std::move(histogram)}};
  j["details"] = report.details;
  return j;
}

std::string report_csv(const ExperimentReport& report) {
  std::string out =
      "system_index,seed_index,final_value,normalized_value,iterations,"
      "grad_norm,corank_at_final,classification,termination,wall_ms\n";
  for (const RunSummary& run : report.runs) {
    out += std::to_string(run.system_index) + ',' +
           std::to_string(run.seed_index) + ',' +
           format_double(run.final_value) + ',' +
           format_double(run.normalized_value) + ',' +
           std::to_string(run.iterations) + ',' +
           format_double(run.grad_norm) + ',' +
           std::to_string(run.corank_at_final) + ',' + run.classification +
           ',' + run.termination + ',' + format_double(run.wall_ms) + '\n';
  }
  return out;
}

}  // namespace qcl
