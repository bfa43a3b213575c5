#include "qcl/harness.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

using qcl::Json;

struct TolFlags {
  double rank_rel = -1.0;
  double transversality = -1.0;
  double larc_growth = -1.0;
  double grad_critical = -1.0;
  double value_gap = -1.0;
  double denom_guard = -1.0;
};

void add_tol_flags(CLI::App* app, TolFlags& flags) {
  app->add_option("--tol-rank", flags.rank_rel,
                  "relative singular-value threshold for numerical rank");
  app->add_option("--tol-transversality", flags.transversality,
                  "normalized residual threshold for transversality");
  app->add_option("--tol-larc", flags.larc_growth,
                  "relative residual admitting a new span direction");
  app->add_option("--tol-grad-critical", flags.grad_critical,
                  "gradient-norm scale for critical-point detection");
  app->add_option("--tol-value-gap", flags.value_gap,
                  "relative gap from the kinematic maximum");
  app->add_option("--tol-denom", flags.denom_guard,
                  "denominator guard for singular synthesis");
}

qcl::Tolerances resolve(const TolFlags& flags) {
  qcl::Tolerances tol;
  if (flags.rank_rel >= 0.0) tol.rank_rel = flags.rank_rel;
  if (flags.transversality >= 0.0) tol.transversality = flags.transversality;
  if (flags.larc_growth >= 0.0) tol.larc_growth = flags.larc_growth;
  if (flags.grad_critical >= 0.0) tol.grad_critical = flags.grad_critical;
  if (flags.value_gap >= 0.0) tol.value_gap = flags.value_gap;
  if (flags.denom_guard >= 0.0) tol.denom_guard = flags.denom_guard;
  return tol;
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    if (text.empty() || text.back() != '\n') {
      std::cout << '\n';
    }
  } else {
    qcl::write_text_file(out_path, text);
  }
}

qcl::Objective load_objective(const std::string& path, int dim) {
  if (path.empty()) {
    return qcl::Objective::gate_j2(qcl::Matrix::Identity(dim, dim));
  }
  return qcl::objective_from_json(qcl::load_json_file(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum control landscape toolkit"};
  app.require_subcommand(1);

  std::string system_path, field_path, objective_path, out_path;
  std::string format = "json";
  std::uint64_t seed = 1;
  TolFlags tols;

  // propagate
  auto* cmd_propagate =
      app.add_subcommand("propagate", "propagate a field and report U_T");
  cmd_propagate->add_option("--system", system_path, "system JSON file")
      ->required();
  cmd_propagate->add_option("--field", field_path, "field JSON file")
      ->required();
  cmd_propagate->add_option("--objective", objective_path,
                            "objective JSON file (default: gate overlap with "
                            "the identity)");
  cmd_propagate->add_option("--out", out_path, "output path (default stdout)");

  // optimize
  auto* cmd_optimize =
      app.add_subcommand("optimize", "single gradient-ascent run");
  int opt_pieces = 64;
  double opt_time = 10.0, opt_kappa = 2.0;
  int opt_max_iters = 2000;
  cmd_optimize->add_option("--system", system_path)->required();
  cmd_optimize->add_option("--objective", objective_path,
                           "objective JSON file")->required();
  cmd_optimize->add_option("--field", field_path,
                           "starting field JSON (default: seeded random)");
  cmd_optimize->add_option("--pieces", opt_pieces);
  cmd_optimize->add_option("--time", opt_time, "total time T");
  cmd_optimize->add_option("--kappa", opt_kappa);
  cmd_optimize->add_option("--max-iters", opt_max_iters);
  cmd_optimize->add_option("--seed", seed);
  cmd_optimize->add_option("--out", out_path);
  cmd_optimize->add_option("--format", format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  // corank
  auto* cmd_corank =
      app.add_subcommand("corank", "end-point Jacobian rank report");
  cmd_corank->add_option("--system", system_path)->required();
  cmd_corank->add_option("--field", field_path)->required();
  cmd_corank->add_option("--objective", objective_path,
                         "adds a transversality residual");
  cmd_corank->add_option("--out", out_path);
  add_tol_flags(cmd_corank, tols);

  // larc
  auto* cmd_larc = app.add_subcommand("larc", "Lie-algebra rank condition");
  cmd_larc->add_option("--system", system_path)->required();
  add_tol_flags(cmd_larc, tols);

  // synth-singular
  auto* cmd_synth = app.add_subcommand(
      "synth-singular", "integrate a candidate singular control");
  double synth_time = 1.0;
  int synth_steps = 10000;
  bool synth_raw = false;
  cmd_synth->add_option("--system", system_path)->required();
  cmd_synth->add_option("--time", synth_time, "total time T");
  cmd_synth->add_option("--steps", synth_steps);
  cmd_synth->add_option("--seed", seed, "seed for the random direction B");
  cmd_synth->add_flag("--raw", synth_raw,
                      "skip projecting B onto the consistency subspace");
  cmd_synth->add_option("--out", out_path);
  add_tol_flags(cmd_synth, tols);

  // search-singular
  auto* cmd_search = app.add_subcommand(
      "search-singular", "stochastic search for singular critical controls");
  double search_time = 10.0, search_kappa = 1.0;
  int search_pieces = 100, search_restarts = 10, search_iters = 40;
  cmd_search->add_option("--system", system_path)->required();
  cmd_search->add_option("--objective", objective_path)->required();
  cmd_search->add_option("--time", search_time);
  cmd_search->add_option("--pieces", search_pieces);
  cmd_search->add_option("--kappa", search_kappa);
  cmd_search->add_option("--restarts", search_restarts);
  cmd_search->add_option("--iters", search_iters);
  cmd_search->add_option("--seed", seed);
  cmd_search->add_option("--out", out_path);

  // scan-fix
  auto* cmd_scan = app.add_subcommand(
      "scan-fix", "sweep one fixed coefficient of the restricted map");
  int scan_generator = 0, scan_piece = 0, scan_count = 101;
  cmd_scan->add_option("--system", system_path)->required();
  cmd_scan->add_option("--field", field_path)->required();
  cmd_scan->add_option("--objective", objective_path);
  cmd_scan->add_option("--generator", scan_generator, "generator index j");
  cmd_scan->add_option("--piece", scan_piece, "piece index k");
  cmd_scan->add_option("--values", scan_count,
                       "number of K values uniform over [-kappa, kappa]");
  cmd_scan->add_option("--out", out_path);
  cmd_scan->add_option("--format", format)->check(
      CLI::IsMember({"json", "csv"}));
  add_tol_flags(cmd_scan, tols);

  // cascade
  auto* cmd_cascade = app.add_subcommand(
      "cascade", "inductively fix parameters and track the restricted map");
  std::string fixes_path;
  cmd_cascade->add_option("--system", system_path)->required();
  cmd_cascade->add_option("--field", field_path)->required();
  cmd_cascade->add_option("--objective", objective_path);
  cmd_cascade
      ->add_option("--fixes", fixes_path,
                   "JSON array of {generator, piece, value}")
      ->required();
  cmd_cascade->add_option("--out", out_path);
  cmd_cascade->add_option("--format", format)->check(
      CLI::IsMember({"json", "csv"}));
  add_tol_flags(cmd_cascade, tols);

  // reproduce
  auto* cmd_reproduce =
      app.add_subcommand("reproduce", "run a bundled experiment preset");
  std::string preset_name;
  std::string config_path;
  std::uint64_t master_seed = 0;
  bool seed_given = false;
  cmd_reproduce->add_option("name", preset_name, "preset name")
      ->check(CLI::IsMember(qcl::preset_names()));
  cmd_reproduce->add_option("--config", config_path,
                            "experiment config JSON (overrides the preset)");
  cmd_reproduce
      ->add_option("--seed", master_seed, "master seed override")
      ->each([&](const std::string&) { seed_given = true; });
  cmd_reproduce->add_option("--out", out_path, "JSON report path");
  std::string csv_path;
  cmd_reproduce->add_option("--csv", csv_path, "CSV summary path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);  // --help
    }
    app.exit(e);
    return 1;
  }

  try {
    const qcl::Tolerances tol = resolve(tols);

    if (cmd_propagate->parsed()) {
      const qcl::ControlSystem system =
          qcl::system_from_json(qcl::load_json_file(system_path));
      const qcl::ControlField field =
          qcl::field_from_json(qcl::load_json_file(field_path));
      const qcl::Trajectory trajectory = qcl::propagate(system, field);
      const qcl::Objective objective =
          load_objective(objective_path, system.dim);
      Json out;
      out["U_T"] = qcl::to_json(trajectory.final_op());
      out["fidelity"] = qcl::evaluate(objective, trajectory.final_op());
      out["normalized_fidelity"] =
          qcl::evaluate(objective, trajectory.final_op()) /
          objective.kinematic_max();
      emit(out_path, out.dump(2) + "\n");
    } else if (cmd_optimize->parsed()) {
      const qcl::ControlSystem system =
          qcl::system_from_json(qcl::load_json_file(system_path));
      const qcl::Objective objective =
          qcl::objective_from_json(qcl::load_json_file(objective_path));
      qcl::ControlField field0 =
          field_path.empty()
              ? qcl::random_field(static_cast<int>(system.generators.size()),
                                  opt_pieces, opt_time, opt_kappa, seed, 0.5)
              : qcl::field_from_json(qcl::load_json_file(field_path));
      qcl::AscentOptions options;
      options.max_iters = opt_max_iters;
      options.seed = seed;
      qcl::RunRecord record =
          qcl::gradient_ascent(system, field0, objective, options);
      const qcl::JacobianReport report =
          qcl::endpoint_jacobian(system, record.final_field, tol);
      record.classification = qcl::to_string(qcl::classify_critical(
          system, record.final_field, objective, report, tol));
      if (format == "csv") {
        emit(out_path,
             qcl::run_csv_row(record, objective.kinematic_max()) + "\n");
      } else {
        emit(out_path, qcl::to_json(record).dump(2) + "\n");
      }
    } else if (cmd_corank->parsed()) {
      const qcl::ControlSystem system =
          qcl::system_from_json(qcl::load_json_file(system_path));
      const qcl::ControlField field =
          qcl::field_from_json(qcl::load_json_file(field_path));
      const qcl::JacobianReport report =
          qcl::endpoint_jacobian(system, field, tol);
      if (!objective_path.empty()) {
        const qcl::Objective objective =
            qcl::objective_from_json(qcl::load_json_file(objective_path));
        const qcl::Trajectory trajectory = qcl::propagate(system, field);
        const qcl::AlgebraElement xi =
            qcl::riemannian_gradient(objective, trajectory.final_op());
        try {
          const auto result =
              qcl::is_transverse_to_level_set(report, xi, tol.transversality);
          emit(out_path,
               qcl::report_summary(report, tol, &result.residual).dump(2) +
                   "\n");
        } catch (const qcl::KinematicCritical&) {
          Json summary = qcl::report_summary(report, tol);
          summary["kinematic_critical"] = true;
          emit(out_path, summary.dump(2) + "\n");
        }
      } else {
        emit(out_path, qcl::report_summary(report, tol).dump(2) + "\n");
      }
    } else if (cmd_larc->parsed()) {
      const qcl::ControlSystem system =
          qcl::system_from_json(qcl::load_json_file(system_path));
      const int dim = qcl::larc_dimension(system, tol.larc_growth);
      const int full = system.dim * system.dim - 1;
      std::cout << "dimension " << dim << " of " << full << ": "
                << (dim == full ? "controllable" : "NOT controllable")
                << "\n";
    } else if (cmd_synth->parsed()) {
      const qcl::ControlSystem system =
          qcl::system_from_json(qcl::load_json_file(system_path));
      const qcl::SingularSeed singular_seed = qcl::make_singular_seed(
          system, qcl::random_element(system.dim, seed, 1.0), !synth_raw);
      const qcl::SingularControl control = qcl::synthesize_singular_control(
          system, singular_seed.direction, synth_time, synth_steps,
          tol.denom_guard);
      Json out;
      out["B"] = qcl::to_json(singular_seed.direction);
      out["r0"] = singular_seed.r0;
      out["r1"] = singular_seed.r1;
      out["samples"] = control.samples;
      out["max_invariant"] = control.max_invariant;
      out["min_denominator"] = control.min_denominator;
      emit(out_path, out.dump(2) + "\n");
    } else if (cmd_search->parsed()) {
      const qcl::ControlSystem system =
          qcl::system_from_json(qcl::load_json_file(system_path));
      const qcl::Objective objective =
          qcl::objective_from_json(qcl::load_json_file(objective_path));
      qcl::SearchOptions options;
      options.restarts = search_restarts;
      options.iters = search_iters;
      const qcl::SearchRecord record = qcl::singular_critical_search(
          system, objective, search_time, search_pieces, search_kappa,
          options, seed);
      emit(out_path, qcl::to_json(record).dump(2) + "\n");
    } else if (cmd_scan->parsed()) {
      const qcl::ControlSystem system =
          qcl::system_from_json(qcl::load_json_file(system_path));
      const qcl::ControlField field =
          qcl::field_from_json(qcl::load_json_file(field_path));
      std::vector<double> values;
      for (int i = 0; i < scan_count; ++i) {
        const double alpha =
            scan_count == 1 ? 0.5
                            : static_cast<double>(i) / (scan_count - 1);
        values.push_back(-field.kappa + 2.0 * field.kappa * alpha);
      }
      std::optional<qcl::Objective> objective;
      if (!objective_path.empty()) {
        objective =
            qcl::objective_from_json(qcl::load_json_file(objective_path));
      }
      const auto points = qcl::fix_parameter_scan(
          system, field, scan_generator, scan_piece, values,
          objective ? &*objective : nullptr, tol);
      emit(out_path, format == "csv" ? qcl::scan_to_csv(points)
                                     : qcl::scan_to_json(points).dump(2) + "\n");
    } else if (cmd_cascade->parsed()) {
      const qcl::ControlSystem system =
          qcl::system_from_json(qcl::load_json_file(system_path));
      const qcl::ControlField field =
          qcl::field_from_json(qcl::load_json_file(field_path));
      std::vector<qcl::CascadeFix> fixes;
      for (const Json& fix : qcl::load_json_file(fixes_path)) {
        fixes.push_back({fix.at("generator").get<int>(),
                         fix.at("piece").get<int>(),
                         fix.at("value").get<double>()});
      }
      std::optional<qcl::Objective> objective;
      if (!objective_path.empty()) {
        objective =
            qcl::objective_from_json(qcl::load_json_file(objective_path));
      }
      const qcl::CascadeReport cascade = qcl::restriction_cascade(
          system, field, fixes, objective ? &*objective : nullptr, tol);
      emit(out_path, format == "csv"
                         ? qcl::cascade_to_csv(cascade)
                         : qcl::to_json(cascade).dump(2) + "\n");
    } else if (cmd_reproduce->parsed()) {
      qcl::ExperimentConfig config;
      if (!config_path.empty()) {
        config = qcl::config_from_json(qcl::load_json_file(config_path));
      } else if (!preset_name.empty()) {
        config = qcl::preset(preset_name);
      } else {
        std::cerr << "reproduce: give a preset name or --config\n";
        return 1;
      }
      if (seed_given) {
        config.master_seed = master_seed;
      }
      if (!out_path.empty()) {
        config.output_json = out_path;
      }
      if (!csv_path.empty()) {
        config.output_csv = csv_path;
      }
      const qcl::ExperimentReport report = qcl::run_experiment(config);
      std::cout << "runs: " << report.runs.size()
                << "  success_fraction: " << report.success_fraction
                << "  trap_candidates: " << report.trap_candidates << "\n";
      if (config.output_json.empty() && config.output_csv.empty()) {
        std::cout << qcl::to_json(report).dump(2) << "\n";
      }
    }
  } catch (const qcl::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const qcl::DegenerateDenominator& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const qcl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
