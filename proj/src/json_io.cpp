#include "drmpc/json_io.hpp"

#include <fstream>
#include <sstream>

#include "drmpc/errors.hpp"

namespace drmpc {

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& what) {
  if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) {
    throw InvalidArgument(what + ": expected a non-empty array");
  }
  if (!j.front().is_array()) {
    const Vector v = vector_from_json(j, what);
    return v;
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw InvalidArgument(what + ": ragged matrix");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw InvalidArgument(what + ": non-numeric entry");
      m(i, c) = v.get<double>();
    }
  }
  return m;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw InvalidArgument(what + ": expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InvalidArgument(what + ": non-numeric entry");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

namespace {

const char* kind_name(ConstraintKind k) {
  return k == ConstraintKind::kState ? "state" : "input";
}

}  // namespace

Json terminal_to_json(const TerminalIngredients& t) {
  Json hs = Json::array();
  for (const TerminalHalfspace& h : t.halfspaces) {
    hs.push_back({{"kind", kind_name(h.kind)},
                  {"normal", vector_to_json(h.normal)},
                  {"probability", h.level},
                  {"name", h.name}});
  }
  return {{"K", matrix_to_json(t.K)},
          {"P", matrix_to_json(t.P)},
          {"sigma_inf", matrix_to_json(t.sigma_inf)},
          {"alpha", t.alpha},
          {"halfspaces", hs}};
}

TerminalIngredients terminal_from_json(const Json& j) {
  TerminalIngredients t;
  try {
    t.K = matrix_from_json(j.at("K"), "terminal.K");
    t.P = matrix_from_json(j.at("P"), "terminal.P");
    if (j.contains("sigma_inf")) {
      t.sigma_inf = matrix_from_json(j.at("sigma_inf"), "terminal.sigma_inf");
    }
    t.alpha = j.at("alpha").get<double>();
    for (const Json& h : j.value("halfspaces", Json::array())) {
      TerminalHalfspace th;
      th.kind = h.value("kind", "state") == "input" ? ConstraintKind::kInput
                                                    : ConstraintKind::kState;
      th.normal = vector_from_json(h.at("normal"), "terminal halfspace");
      th.level = h.value("probability", 0.5);
      th.name = h.value("name", "");
      t.halfspaces.push_back(std::move(th));
    }
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("terminal ingredients: ") + e.what());
  }
  return t;
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  try {
    return Json::parse(in, nullptr, true, true);
  } catch (const Json::exception& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << text;
}

}  // namespace drmpc
