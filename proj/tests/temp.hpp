#pragma once

#include <filesystem>
#include <random>
#include <string>

namespace testutil {

inline std::filesystem::path make_temp_dir(const std::string& tag = "scratch") {
  auto base = std::filesystem::temp_directory_path();
  static std::mt19937_64 rng{std::random_device{}()};
  std::filesystem::path p;
  do {
    p = base / (tag + "-" + std::to_string(rng()));
  } while (std::filesystem::exists(p));
  std::filesystem::create_directories(p);
  return p;
}

// Self-cleaning scratch directory for tests that touch the filesystem.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag = "scratch") : path(make_temp_dir(tag)) {}
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::string str() const { return path.string(); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace testutil
