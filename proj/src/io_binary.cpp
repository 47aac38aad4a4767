#include "wildocc/io/binary.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

namespace wildocc::io {

namespace fs = std::filesystem;

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  Bytes out(size);
  if (size > 0 && !in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(size)))
    throw Error(ErrorKind::kIo, "failed reading " + path.string());
  return out;
}

namespace {

fs::path temp_sibling(const fs::path& path) {
  static std::atomic<unsigned> counter{0};
  std::ostringstream name;
  name << '.' << path.filename().string() << ".tmp" << std::hash<std::thread::id>{}(std::this_thread::get_id())
       << '_' << counter++;
  return path.parent_path() / name.str();
}

void write_raw(const fs::path& path, const char* data, std::size_t n) {
  if (path.has_parent_path() && !fs::exists(path.parent_path()))
    throw Error(ErrorKind::kIo, "directory does not exist: " + path.parent_path().string());
  const fs::path tmp = temp_sibling(path);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot create " + tmp.string());
    out.write(data, static_cast<std::streamsize>(n));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorKind::kIo, "failed writing " + path.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::kIo, "cannot rename onto " + path.string());
  }
}

}  // namespace

void atomic_write(const fs::path& path, const Bytes& bytes) {
  write_raw(path, reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

void atomic_write(const fs::path& path, const std::string& text) {
  write_raw(path, text.data(), text.size());
}

}  // namespace wildocc::io
