#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "narrex/daily_series.hpp"

namespace narrex::io {

/// Writes `content`, creating parent directories. Throws IoError.
void write_file(const std::filesystem::path& path, std::string_view content);

/// Throws IoError if the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Shortest round-trip decimal form; negative zero prints as "0".
std::string format_number(double v);

/// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_field(std::string_view s);

/// Splits CSV text into rows of fields (RFC 4180 quoting, CRLF tolerated).
std::vector<std::vector<std::string>> parse_csv(std::string_view content);

struct PlotLine {
  std::string name;
  DailySeries series;
};

/// Minimal polyline chart over calendar days.
std::string render_line_chart_svg(std::string_view title, std::string_view y_label, const std::vector<PlotLine>& lines);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

}  // namespace narrex::io
