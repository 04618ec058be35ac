#pragma once

#include <filesystem>
#include <string>

#include "objf/common/rng.hpp"

namespace testutil {

// Unique scratch directory under the build tree, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& hint) {
    static objf::Rng rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            ("objf_test_" + hint + "_" + std::to_string(rng.next_u64()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

}  // namespace testutil
