#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace fracvar::io {

// Shortest round-trip decimal, independent of the locale.
std::string fmt(double x);

// Writes to a sibling temporary file, then renames it over `path`.
void atomic_write(const std::filesystem::path& path, const std::string& content);

class Csv {
 public:
  explicit Csv(std::vector<std::string> header);
  void add(const std::vector<std::string>& row);
  void add(const std::vector<double>& row);
  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Line-oriented `key = value`; '#' starts a comment. Throws ValidationError
// on malformed lines or duplicate keys.
std::map<std::string, std::string> parse_config(const std::string& text);
std::map<std::string, std::string> read_config(const std::filesystem::path& path);

// Comma-separated doubles, e.g. "1, 0.5, 0.25".
std::vector<double> parse_list(const std::string& text);

}  // namespace fracvar::io
