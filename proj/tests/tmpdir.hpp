#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>

inline std::string tmp_path(const std::string& name) {
  const char* env = std::getenv("GMCFUSE_TMP");
  std::filesystem::path dir = env ? env : std::filesystem::temp_directory_path() / "gmcfuse_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}
