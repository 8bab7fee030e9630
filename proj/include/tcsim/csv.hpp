#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace tcsim {

/// Shortest round-trip-stable text at 17 significant digits ("nan", "inf"
/// for non-finite values).
std::string format_number(double value);

/// Builds CSV text row by row. Cells are written verbatim.
class CsvBuilder {
 public:
  explicit CsvBuilder(std::initializer_list<std::string_view> header);

  CsvBuilder& cell(double value);
  CsvBuilder& cell(long long value);
  CsvBuilder& cell(std::string_view text);
  CsvBuilder& empty();
  void end_row();

  const std::string& text() const { return text_; }

 private:
  std::string text_;
  bool row_open_ = false;
  void separator();
};

void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace tcsim
