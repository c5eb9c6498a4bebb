#pragma once

#include <json.hpp>
#include <string>

#include "drmpc/linalg.hpp"
#include "drmpc/terminal.hpp"

namespace drmpc {

using Json = nlohmann::json;

/// Row-major nested arrays. A flat array reads as a column vector.
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, const std::string& what);

Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j, const std::string& what);

Json terminal_to_json(const TerminalIngredients& t);
TerminalIngredients terminal_from_json(const Json& j);

Json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace drmpc
