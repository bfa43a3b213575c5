#pragma once

#include "qcl/synthesis.hpp"

#include "json.hpp"

#include <iosfwd>

namespace qcl {

using Json = nlohmann::ordered_json;

// Complex matrices serialize as nested arrays of [re, im] pairs, row by row.
Json to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);
Json to_json(const Vector& v);
Vector vector_from_json(const Json& j);

// {T, p, kappa, generators, coeffs} with coeffs row-major; round-trips at
// full double precision.
Json to_json(const ControlField& field);
ControlField field_from_json(const Json& j);

// {dim, drift, generators}.
Json to_json(const ControlSystem& system);
ControlSystem system_from_json(const Json& j);

Json to_json(const Objective& objective);
Objective objective_from_json(const Json& j);

Json to_json(const Tolerances& tol);
Tolerances tolerances_from_json(const Json& j);

// {sigma, rank, corank, residual?, tolerances}.
Json report_summary(const JacobianReport& report,
                    const Tolerances& tol,
                    const double* residual = nullptr);

Json to_json(const RunRecord& record);
// One CSV line (no terminator): seed, final value, normalized value,
// iterations, grad norm, classification, termination.
std::string run_csv_row(const RunRecord& record, double kinematic_max);

Json to_json(const SearchRecord& record);
Json to_json(const CascadeReport& report);
Json scan_to_json(const std::vector<ScanPoint>& points);
std::string scan_to_csv(const std::vector<ScanPoint>& points);
std::string cascade_to_csv(const CascadeReport& report);

std::string format_double(double value);  // 17 significant digits

Json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace qcl
