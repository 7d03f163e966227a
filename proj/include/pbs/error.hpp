#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pbs {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `line` is 1-based for text formats, 0 when the
/// position is a byte offset into a binary payload.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, std::size_t offset, const std::string& what)
      : Error(format(file, line, offset, what)), file_(file), line_(line), offset_(offset) {}

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }
  std::size_t offset() const { return offset_; }

 private:
  static std::string format(const std::string& file, std::size_t line, std::size_t offset,
                            const std::string& what) {
    std::string loc = file;
    if (line > 0) loc += ":" + std::to_string(line);
    else loc += "@" + std::to_string(offset);
    return loc + ": " + what;
  }

  std::string file_;
  std::size_t line_;
  std::size_t offset_;
};

}  // namespace pbs
