#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "refform/dsl.hpp"

namespace testutil {

inline std::string source_path(const std::string& relative) {
  return std::string(REFFORM_SOURCE_DIR) + "/" + relative;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline refform::Circuit load_circuit(const std::string& relative) {
  auto result = refform::parse(read_file(source_path(relative)));
  if (!result.ok())
    throw std::runtime_error(
        refform::format_diagnostics(result.diagnostics, relative));
  return *result.circuit;
}

}  // namespace testutil
