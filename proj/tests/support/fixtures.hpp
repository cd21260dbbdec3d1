#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "streampart/problem_io.hpp"

namespace streampart::testing {

inline std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(STREAMPART_TEST_DATA) + "/" + name, std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ProblemSpec load_problem(const std::string& name) { return parse_problem(read_fixture(name)); }

}  // namespace streampart::testing
