#include "automsc/io.hpp"

#include <system_error>
#include <unistd.h>

#include "automsc/error.hpp"

namespace automsc {

namespace fs = std::filesystem;

AtomicFile::AtomicFile(fs::path path, std::ios::openmode mode) : path_(std::move(path)) {
  static int counter = 0;
  temp_ = path_;
  temp_ += ".tmp-" + std::to_string(::getpid()) + "-" + std::to_string(counter++);
  out_.open(temp_, mode | std::ios::out | std::ios::trunc);
  if (!out_) throw Error(ErrorKind::Io, "cannot write '" + path_.string() + "'");
}

AtomicFile::~AtomicFile() {
  if (!committed_) {
    out_.close();
    std::error_code ec;
    fs::remove(temp_, ec);
  }
}

void AtomicFile::commit() {
  out_.flush();
  const bool ok = static_cast<bool>(out_);
  out_.close();
  if (!ok) throw Error(ErrorKind::Io, "failed writing '" + path_.string() + "'");
  std::error_code ec;
  fs::rename(temp_, path_, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot move output into '" + path_.string() + "': " + ec.message());
  committed_ = true;
}

std::ostream& OutputSet::open(const fs::path& path) {
  files_.push_back(std::make_unique<AtomicFile>(path));
  return files_.back()->stream();
}

void OutputSet::commit() {
  for (auto& f : files_) f->commit();
  files_.clear();
}

std::ifstream open_input(const fs::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  return in;
}

}  // namespace automsc
