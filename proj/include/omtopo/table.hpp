#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace omtopo {

// Column-oriented result table with deterministic serialization: CSV cells use
// shortest round-trip formatting (to_chars), LF line endings, '.' decimal
// separator; JSON mirrors the same columns as arrays in declaration order.
struct Column {
  enum class Kind { Real, Integer, Text };
  std::string name;
  Kind kind = Kind::Real;
  std::vector<double> reals;
  std::vector<std::int64_t> integers;
  std::vector<std::string> texts;
  std::size_t size() const noexcept;
};

struct Table {
  std::vector<Column> columns;
  Column& add_real(const std::string& name);
  Column& add_integer(const std::string& name);
  Column& add_text(const std::string& name);
  std::size_t rows() const;  // throws DataCorruptionError on ragged columns
};

std::string format_real(double x);

std::string emit_csv(const Table& t);
std::string emit_json(const Table& t);

enum class OutputFormat { Csv, Json };

// Writes the table to `path` and a sidecar `path + ".meta.json"` holding the
// resolved configuration and timing info.  Table bytes are deterministic for
// a given input; the sidecar's timing fields are not part of that contract.
void write_table(const Table& t, const std::string& path, OutputFormat format,
                 const std::string& meta_json);

}  // namespace omtopo
