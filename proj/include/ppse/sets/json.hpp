#pragma once

#include <json.hpp>

#include "ppse/sets/types.hpp"

namespace ppse::sets {

/// Matrices are arrays of rows; an n×0 matrix is n empty rows.
nlohmann::json matrix_to_json(const MatrixX<double>& M);
/// `cols` fixes the width when the array has no rows.
MatrixX<double> matrix_from_json(const nlohmann::json& j, Index cols = 0);

nlohmann::json vector_to_json(const VectorX<double>& v);
VectorX<double> vector_from_json(const nlohmann::json& j);

/// {c, G}
nlohmann::json to_json(const Zonotoped& z);
/// {c, G, A, b}; A and b are omitted when there are no constraints.
nlohmann::json to_json(const ConstrainedZonotoped& z);
/// {H, y, R}
nlohmann::json to_json(const Stripd& s);

Zonotoped zonotope_from_json(const nlohmann::json& j);
ConstrainedZonotoped conszono_from_json(const nlohmann::json& j);
Stripd strip_from_json(const nlohmann::json& j);

}  // namespace ppse::sets
