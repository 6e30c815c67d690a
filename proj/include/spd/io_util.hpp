#ifndef SPD_IO_UTIL_HPP
#define SPD_IO_UTIL_HPP

#include <string>
#include <vector>

namespace spd::io {

/// Formats a double for CSV cells: up to 15 significant digits, '.' decimal
/// separator, no locale dependence.
std::string format_number(double v);

/// Writes `content` to `path` through a temp file + rename, creating parent
/// directories as needed. A failed write never leaves a partial file.
void write_atomic(const std::string& path, const std::string& content);

/// Reads a whole file; throws IoError when missing or unreadable.
std::string read_file(const std::string& path);

/// CSV accumulator with a fixed column count and LF line endings.
class CsvBuilder {
 public:
  explicit CsvBuilder(std::vector<std::string> header);

  void row(const std::vector<std::string>& cells);
  const std::string& str() const { return body_; }
  std::size_t rows() const { return rows_; }

 private:
  std::string body_;
  std::size_t columns_ = 0;
  std::size_t rows_ = 0;
};

}  // namespace spd::io

#endif  // SPD_IO_UTIL_HPP
