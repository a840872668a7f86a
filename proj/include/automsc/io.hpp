#pragma once

#include <filesystem>
#include <fstream>
#include <ios>
#include <memory>
#include <string>
#include <vector>

namespace automsc {

/// Writes to a temporary sibling of `path` and renames it into place on
/// commit(). An uncommitted file is removed on destruction, so a failed
/// command never leaves a partial output behind.
class AtomicFile {
 public:
  explicit AtomicFile(std::filesystem::path path, std::ios::openmode mode = std::ios::out);
  ~AtomicFile();
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;

  std::ostream& stream() { return out_; }
  const std::filesystem::path& path() const noexcept { return path_; }

  /// Flushes, closes and renames. Throws Error(Io) on failure.
  void commit();

 private:
  std::filesystem::path path_;
  std::filesystem::path temp_;
  std::ofstream out_;
  bool committed_ = false;
};

/// A group of files that are published together: nothing is renamed into
/// place until commit(), and all temporaries are discarded otherwise.
class OutputSet {
 public:
  std::ostream& open(const std::filesystem::path& path);
  void commit();

 private:
  std::vector<std::unique_ptr<AtomicFile>> files_;
};

std::ifstream open_input(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in);

}  // namespace automsc
