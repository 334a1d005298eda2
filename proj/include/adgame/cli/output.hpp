#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace adgame::cli {

/// %.17g, which round-trips every finite double.
std::string format_number(double x);

/// Serializes with numbers in %.17g, two-space indent and a final newline.
/// Non-finite numbers become null.
std::string dump_json(const nlohmann::ordered_json& value);

/// Comma separated, `.` decimal, header row, LF line endings.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  void row(const std::vector<double>& values);
  std::size_t rows() const noexcept { return rows_; }
  const std::string& str() const noexcept { return text_; }

 private:
  std::size_t columns_;
  std::size_t rows_ = 0;
  std::string text_;
};

/// Resolves `out` against ADGAME_OUTPUT_DIR when the variable is set and
/// `out` is relative.
std::filesystem::path resolve_output(const std::filesystem::path& out);

struct Artifact {
  std::filesystem::path path;
  std::string content;
};

/// Writes every artifact to a temporary sibling first and renames them into
/// place only after all writes succeeded. Throws InvalidInput on I/O errors.
void write_artifacts(const std::vector<Artifact>& artifacts);

}  // namespace adgame::cli
