#include "tcsim/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tcsim {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  std::array<char, 64> buf{};
  auto [ptr, ec] =
      std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 17);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf.data(), ptr);
}

CsvBuilder::CsvBuilder(std::initializer_list<std::string_view> header) {
  bool first = true;
  for (auto h : header) {
    if (!first) text_ += ',';
    text_ += h;
    first = false;
  }
  text_ += '\n';
}

void CsvBuilder::separator() {
  if (row_open_) text_ += ',';
  row_open_ = true;
}

CsvBuilder& CsvBuilder::cell(double value) {
  separator();
  text_ += format_number(value);
  return *this;
}

CsvBuilder& CsvBuilder::cell(long long value) {
  separator();
  text_ += std::to_string(value);
  return *this;
}

CsvBuilder& CsvBuilder::cell(std::string_view text) {
  separator();
  text_ += text;
  return *this;
}

CsvBuilder& CsvBuilder::empty() {
  separator();
  return *this;
}

void CsvBuilder::end_row() {
  text_ += '\n';
  row_open_ = false;
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace tcsim
