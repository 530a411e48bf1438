#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "vrdkit/corpus.hpp"

namespace vrdkit::support {

inline const std::filesystem::path kTestData = VRDKIT_TEST_DATA;
inline const std::filesystem::path kDemoData = VRDKIT_DEMO_DATA;

inline CorpusPaths listing_paths() {
  const auto dir = kTestData / "listing1";
  return {dir / "annotations.json", dir / "classes.json", dir / "predicates.json"};
}

inline CorpusPaths demo_paths() {
  return {kDemoData / "annotations.json", kDemoData / "classes.json", kDemoData / "predicates.json"};
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("vrdkit-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline VisualRelationship vr(ClassId s, BoundingBox sb, PredicateId p, ClassId o, BoundingBox ob) {
  return {{s, sb}, p, {o, ob}};
}

}  // namespace vrdkit::support
