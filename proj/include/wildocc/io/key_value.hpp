#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace wildocc::io {

/// Flat `key = value` text. Lines starting with `#` are comments; a key may
/// repeat (e.g. one `frame` line per scan) and order is preserved.
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::string& text, const std::string& source = "<text>");
  static KeyValueFile load(const std::filesystem::path& path);

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  /// Last value for `key`, if any.
  std::optional<std::string> get(const std::string& key) const;
  std::vector<std::string> get_all(const std::string& key) const;
  void set(const std::string& key, const std::string& value);
  std::string dump() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace wildocc::io
