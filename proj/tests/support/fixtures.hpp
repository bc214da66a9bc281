// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

namespace atq::testing {

inline std::filesystem::path fixture(std::string_view name) {
  return std::filesystem::path(ATQ_FIXTURES_DIR) / name;
}

inline std::filesystem::path golden(std::string_view name) {
  return std::filesystem::path(ATQ_GOLDEN_DIR) / name;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace atq::testing
