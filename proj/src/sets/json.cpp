#include "ppse/sets/json.hpp"

#include <string>

#include "ppse/error.hpp"

namespace ppse::sets {

using nlohmann::json;

json matrix_to_json(const MatrixX<double>& M) {
  json rows = json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixX<double> matrix_from_json(const json& j, Index cols) {
  if (!j.is_array()) throw ParseError("matrix must be an array of rows");
  const Index rows = Index(j.size());
  if (rows > 0) {
    if (!j[0].is_array()) throw ParseError("matrix row must be an array");
    cols = Index(j[0].size());
  }
  MatrixX<double> M(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json& row = j[std::size_t(i)];
    if (!row.is_array() || Index(row.size()) != cols) {
      throw ParseError("matrix row " + std::to_string(i) + " has the wrong length");
    }
    for (Index k = 0; k < cols; ++k) {
      if (!row[std::size_t(k)].is_number()) throw ParseError("matrix entries must be numbers");
      M(i, k) = row[std::size_t(k)].get<double>();
    }
  }
  return M;
}

json vector_to_json(const VectorX<double>& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

VectorX<double> vector_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("vector must be an array");
  VectorX<double> v(Index(j.size()));
  for (Index i = 0; i < v.size(); ++i) {
    if (!j[std::size_t(i)].is_number()) throw ParseError("vector entries must be numbers");
    v(i) = j[std::size_t(i)].get<double>();
  }
  return v;
}

json to_json(const Zonotoped& z) { return json{{"c", vector_to_json(z.c)}, {"G", matrix_to_json(z.G)}}; }

json to_json(const ConstrainedZonotoped& z) {
  json out{{"c", vector_to_json(z.c)}, {"G", matrix_to_json(z.G)}};
  if (z.num_constraints() > 0) {
    out["A"] = matrix_to_json(z.A);
    out["b"] = vector_to_json(z.b);
  }
  return out;
}

json to_json(const Stripd& s) {
  return json{{"H", matrix_to_json(s.H)}, {"y", vector_to_json(s.y)}, {"R", vector_to_json(s.R)}};
}

namespace {

const json& field(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) throw ParseError(std::string("missing field ") + name);
  return j.at(name);
}

}  // namespace

Zonotoped zonotope_from_json(const json& j) {
  VectorX<double> c = vector_from_json(field(j, "c"));
  MatrixX<double> G = matrix_from_json(field(j, "G"));
  if (G.rows() == 0 && c.size() > 0) throw ParseError("generator matrix needs one row per dimension");
  return Zonotoped(std::move(c), std::move(G));
}

ConstrainedZonotoped conszono_from_json(const json& j) {
  const Zonotoped z = zonotope_from_json(j);
  if (j.contains("A") != j.contains("b")) throw ParseError("A and b must appear together");
  if (!j.contains("A")) return ConstrainedZonotoped(z);
  return ConstrainedZonotoped(z.c, z.G, matrix_from_json(j.at("A"), z.num_generators()),
                              vector_from_json(j.at("b")));
}

Stripd strip_from_json(const json& j) {
  return Stripd(matrix_from_json(field(j, "H")), vector_from_json(field(j, "y")),
                vector_from_json(field(j, "R")));
}

}  // namespace ppse::sets
