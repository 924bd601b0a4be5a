#ifndef FCN_TESTS_SUPPORT_TMPDIR_HPP
#define FCN_TESTS_SUPPORT_TMPDIR_HPP

#include <atomic>
#include <filesystem>
#include <string>

namespace testsupport {

/// Scoped unique directory under the system temp path.
class TmpDir {
 public:
  explicit TmpDir(const std::string& tag = "fcn") {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            (tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }

  ~TmpDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }

  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& leaf = "") const {
    return leaf.empty() ? path_.string() : (path_ / leaf).string();
  }

 private:
  std::filesystem::path path_;
};

}  // namespace testsupport

#endif  // FCN_TESTS_SUPPORT_TMPDIR_HPP
