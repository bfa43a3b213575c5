#include "qcl/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace qcl {

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back({m(r, c).real(), m(r, c).imag()});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) {
    throw IoError("matrix: expected a non-empty array of rows");
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j.at(0).size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw IoError("matrix: ragged rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Json& entry = row.at(static_cast<std::size_t>(c));
      if (!entry.is_array() || entry.size() != 2) {
        throw IoError("matrix: entries must be [re, im] pairs");
      }
      m(r, c) = Complex(entry.at(0).get<double>(), entry.at(1).get<double>());
    }
  }
  return m;
}

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out.push_back({v(i).real(), v(i).imag()});
  }
  return out;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) {
    throw IoError("vector: expected an array of [re, im] pairs");
  }
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Json& entry = j.at(i);
    if (!entry.is_array() || entry.size() != 2) {
      throw IoError("vector: entries must be [re, im] pairs");
    }
    v(static_cast<Eigen::Index>(i)) =
        Complex(entry.at(0).get<double>(), entry.at(1).get<double>());
  }
  return v;
}

Json to_json(const ControlField& field) {
  Json j;
  j["T"] = field.total_time;
  j["p"] = field.pieces;
  j["kappa"] = field.kappa;
  j["generators"] = field.num_generators();
  Json coeffs = Json::array();
  for (int g = 0; g < field.num_generators(); ++g) {
    for (int k = 0; k < field.pieces; ++k) {
      coeffs.push_back(field.coeffs(g, k));
    }
  }
  j["coeffs"] = std::move(coeffs);
  return j;
}

ControlField field_from_json(const Json& j) {
  ControlField field;
  try {
    field.total_time = j.at("T").get<double>();
    field.pieces = j.at("p").get<int>();
    field.kappa = j.at("kappa").get<double>();
    const int generators = j.at("generators").get<int>();
    const Json& coeffs = j.at("coeffs");
    if (static_cast<int>(coeffs.size()) != generators * field.pieces) {
      throw IoError("field: coeffs length does not match generators × p");
    }
    field.coeffs = RealMatrix(generators, field.pieces);
    for (int g = 0; g < generators; ++g) {
      for (int k = 0; k < field.pieces; ++k) {
        field.coeffs(g, k) =
            coeffs.at(static_cast<std::size_t>(g * field.pieces + k))
                .get<double>();
      }
    }
  } catch (const Json::exception& e) {
    throw IoError(std::string("field: ") + e.what());
  }
  check_field(field);
  return field;
}

Json to_json(const ControlSystem& system) {
  Json j;
  j["dim"] = system.dim;
  j["drift"] = to_json(system.drift);
  Json generators = Json::array();
  for (const auto& g : system.generators) {
    generators.push_back(to_json(g));
  }
  j["generators"] = std::move(generators);
  return j;
}

ControlSystem system_from_json(const Json& j) {
  ControlSystem system;
  try {
    system.dim = j.at("dim").get<int>();
    system.drift = matrix_from_json(j.at("drift"));
    for (const Json& g : j.at("generators")) {
      system.generators.push_back(matrix_from_json(g));
    }
  } catch (const Json::exception& e) {
    throw IoError(std::string("system: ") + e.what());
  }
  check_system(system);
  return system;
}

Json to_json(const Objective& objective) {
  Json j;
  j["kind"] = to_string(objective.kind);
  switch (objective.kind) {
    case ObjectiveKind::J1Gate:
    case ObjectiveKind::J2Gate:
      j["target"] = to_json(objective.target);
      break;
    case ObjectiveKind::StateTransfer:
      j["psi_initial"] = to_json(objective.psi_initial);
      j["psi_final"] = to_json(objective.psi_final);
      break;
    case ObjectiveKind::Observable:
      j["rho0"] = to_json(objective.rho0);
      j["observable"] = to_json(objective.observable);
      break;
  }
  return j;
}

Objective objective_from_json(const Json& j) {
  Objective objective;
  try {
    objective.kind = objective_kind_from_string(j.at("kind").get<std::string>());
    switch (objective.kind) {
      case ObjectiveKind::J1Gate:
      case ObjectiveKind::J2Gate:
        objective.target = matrix_from_json(j.at("target"));
        break;
      case ObjectiveKind::StateTransfer:
        objective.psi_initial = vector_from_json(j.at("psi_initial"));
        objective.psi_final = vector_from_json(j.at("psi_final"));
        break;
      case ObjectiveKind::Observable:
        objective.rho0 = matrix_from_json(j.at("rho0"));
        objective.observable = matrix_from_json(j.at("observable"));
        break;
    }
  } catch (const Json::exception& e) {
    throw IoError(std::string("objective: ") + e.what());
  }
  check_objective(objective);
  return objective;
}

Json to_json(const Tolerances& tol) {
  Json j;
  j["anti_hermitian"] = tol.anti_hermitian;
  j["trace"] = tol.trace;
  j["unitarity"] = tol.unitarity;
  j["special_det"] = tol.special_det;
  j["orthonormality"] = tol.orthonormality;
  j["rank_rel"] = tol.rank_rel;
  j["transversality"] = tol.transversality;
  j["larc_growth"] = tol.larc_growth;
  j["grad_critical"] = tol.grad_critical;
  j["value_gap"] = tol.value_gap;
  j["hessian_nsd"] = tol.hessian_nsd;
  j["denom_guard"] = tol.denom_guard;
  return j;
}

Tolerances tolerances_from_json(const Json& j) {
  Tolerances tol;
  auto read = [&](const char* key, double& slot) {
    if (j.contains(key)) {
      slot = j.at(key).get<double>();
    }
  };
  read("anti_hermitian", tol.anti_hermitian);
  read("trace", tol.trace);
  read("unitarity", tol.unitarity);
  read("special_det", tol.special_det);
  read("orthonormality", tol.orthonormality);
  read("rank_rel", tol.rank_rel);
  read("transversality", tol.transversality);
  read("larc_growth", tol.larc_growth);
  read("grad_critical", tol.grad_critical);
  read("value_gap", tol.value_gap);
  read("hessian_nsd", tol.hessian_nsd);
  read("denom_guard", tol.denom_guard);
  return tol;
}

Json report_summary(const JacobianReport& report, const Tolerances& tol,
                    const double* residual) {
  Json j;
  Json sigma = Json::array();
  for (Eigen::Index i = 0; i < report.singular_values.size(); ++i) {
    sigma.push_back(report.singular_values(i));
  }
  j["sigma"] = std::move(sigma);
  j["rank"] = report.rank;
  j["corank"] = report.corank;
  if (residual != nullptr) {
    j["residual"] = *residual;
  }
  j["tolerances"] = {{"rank_rel", tol.rank_rel},
                     {"transversality", tol.transversality}};
  return j;
}

Json to_json(const RunRecord& record) {
  Json j;
  j["seed"] = record.seed;
  j["iterations"] = record.iterations;
  j["final_value"] = record.final_value;
  j["final_grad_norm"] = record.final_grad_norm;
  j["termination"] = to_string(record.termination);
  j["classification"] = record.classification;
  j["options"] = {{"max_iters", record.options.max_iters},
                  {"step0", record.options.step0},
                  {"backtrack", record.options.backtrack},
                  {"armijo_c", record.options.armijo_c},
                  {"grad_tol", record.options.grad_tol},
                  {"value_tol", record.options.value_tol},
                  {"line_search", "armijo_backtracking"}};
  j["objective_trace"] = record.objective_trace;
  j["final_field"] = to_json(record.final_field);
  return j;
}

std::string run_csv_row(const RunRecord& record, double kinematic_max) {
  std::ostringstream out;
  out << record.seed << ',' << format_double(record.final_value) << ','
      << format_double(record.final_value / kinematic_max) << ','
      << record.iterations << ',' << format_double(record.final_grad_norm)
      << ',' << record.classification << ',' << to_string(record.termination);
  return out.str();
}

Json to_json(const SearchRecord& record) {
  Json j;
  j["seed"] = record.seed;
  j["total_rejections"] = record.total_rejections;
  j["best_value"] = record.best_value;
  j["any_converged"] = record.any_converged;
  j["any_verified"] = record.any_verified;
  Json restarts = Json::array();
  for (const RestartRecord& run : record.restarts) {
    Json r;
    r["seed"] = run.seed;
    r["feasible"] = run.feasible;
    r["iterations"] = run.iterations;
    r["rejections"] = run.rejections;
    r["best_value"] = run.best_value;
    r["xi_norm"] = run.xi_norm;
    r["final_grad_norm"] = run.final_grad_norm;
    r["final_corank"] = run.final_corank;
    r["converged"] = run.converged;
    r["verified"] = run.verified;
    r["false_positive"] = run.false_positive;
    r["history"] = run.history;
    if (run.feasible) {
      r["direction"] = to_json(run.direction);
    }
    restarts.push_back(std::move(r));
  }
  j["restarts"] = std::move(restarts);
  return j;
}

Json to_json(const CascadeReport& report) {
  Json j;
  j["stopped_early"] = report.stopped_early;
  Json steps = Json::array();
  for (const CascadeStep& step : report.steps) {
    steps.push_back({{"generator", step.fix.generator},
                     {"piece", step.fix.piece},
                     {"value", step.fix.value},
                     {"corank", step.corank},
                     {"residual", step.residual},
                     {"kinematic", step.kinematic},
                     {"larc_dim", step.larc_dim},
                     {"transversality_failed", step.transversality_failed}});
  }
  j["steps"] = std::move(steps);
  return j;
}

Json scan_to_json(const std::vector<ScanPoint>& points) {
  Json out = Json::array();
  for (const ScanPoint& point : points) {
    out.push_back({{"value", point.value},
                   {"corank", point.corank},
                   {"residual", point.residual},
                   {"kinematic", point.kinematic}});
  }
  return out;
}

std::string scan_to_csv(const std::vector<ScanPoint>& points) {
  std::ostringstream out;
  out << "value,corank,residual,kinematic\n";
  for (const ScanPoint& point : points) {
    out << format_double(point.value) << ',' << point.corank << ','
        << format_double(point.residual) << ',' << (point.kinematic ? 1 : 0)
        << '\n';
  }
  return out.str();
}

std::string cascade_to_csv(const CascadeReport& report) {
  std::ostringstream out;
  out << "generator,piece,value,corank,residual,kinematic,larc_dim,"
         "transversality_failed\n";
  for (const CascadeStep& step : report.steps) {
    out << step.fix.generator << ',' << step.fix.piece << ','
        << format_double(step.fix.value) << ',' << step.corank << ','
        << format_double(step.residual) << ',' << (step.kinematic ? 1 : 0)
        << ',' << step.larc_dim << ',' << (step.transversality_failed ? 1 : 0)
        << '\n';
  }
  return out.str();
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path);
  }
  out << text;
  if (!out) {
    throw IoError("short write to " + path);
  }
}

}  // namespace qcl
