#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

namespace debye {

/// Shortest-round-trip is not enough for diffable output; we always print
/// 17 significant digits, locale independent.
std::string format_double(double v);

/// Compact representation used in file names (e.g. 0.01, 1e-05).
std::string format_tag(double v);

/// Writes `content` to a sibling temporary and renames it over `path`, so a
/// reader never observes a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

class CsvWriter {
 public:
  explicit CsvWriter(std::initializer_list<std::string_view> header);

  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(std::string_view v);
  void end_row();
  void comment(std::string_view text);

  const std::string& str() const noexcept { return buf_; }

 private:
  std::string buf_;
  bool row_open_ = false;
};

}  // namespace debye
