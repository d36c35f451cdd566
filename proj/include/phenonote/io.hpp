#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phenonote/matrix.hpp"

namespace phenonote {

/// Whole-file read. Throws DataError naming the path when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Write through a temporary sibling file and rename over the destination,
/// so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double value);

std::string csv_escape(std::string_view field);

/// Split one CSV record (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_csv_line(std::string_view line);

/// Numeric table with an id column and an optional trailing label column.
/// This is the on-disk shape of feature matrices and projected matrices:
///   id,<col1>,...,<colK>[,label]
struct Table {
    std::vector<std::string> row_ids;
    std::vector<std::string> columns;
    Matrix values;
    std::optional<std::vector<std::string>> labels;
};

std::string write_table_csv(const Table& table);
Table parse_table_csv(std::string_view text, std::string_view source);
Table read_table_csv(const std::filesystem::path& path);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view data);

}  // namespace phenonote
