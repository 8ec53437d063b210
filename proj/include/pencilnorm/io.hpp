#pragma once

#include "pencilnorm/decomp.hpp"
#include "pencilnorm/gauge.hpp"

#include <json.hpp>

#include <string>

namespace pn::io {

using Json = nlohmann::ordered_json;

// Complex matrices serialize as row-major arrays of [re, im] pairs.
Json matrix_to_json(const CMat& M);
CMat matrix_from_json(const Json& j);
Json vector_to_json(const RVec& v);
RVec vector_from_json(const Json& j);

/// {"kind": "unit_circle" | "unit_circle_arc" | ..., "a": .., "b": ..} or
/// raw {"phi": mat2, "psi": mat2}.
region::CurveSpec curve_from_json(const Json& j);
Json curve_to_json(const region::CurveSpec& c);

/// {"family": "toeplitz", "n": 8}, other family names with their size
/// parameters, or raw {"F": .., "G": .., "E": ..}.
pencil::PencilSpec pencil_from_json(const Json& j);

Json decomposition_to_json(const decomp::AtomicDecomposition& d);

Json certificate_to_json(const gauge::DualCertificate& c);
gauge::DualCertificate certificate_from_json(const Json& j);

Json load_json(const std::string& path);                  // throws std::runtime_error
void save_json(const std::string& path, const Json& j);   // stable formatting

/// Two-column CSV with a fixed "%.12g" number format so repeated runs are
/// byte-identical.
void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::pair<double, double>>& rows);

} // namespace pn::io
