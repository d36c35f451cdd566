#include "phenonote/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <system_error>

#include "phenonote/error.hpp"

namespace phenonote {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw DataError("cannot write " + tmp.string());
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            throw DataError("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw DataError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) {
        throw Error("format_double failed");
    }
    return std::string(buf, end);
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') {
            out += '"';
        }
        out += ch;
    }
    out += '"';
    return out;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (quoted) {
        throw DataError("unterminated quoted CSV field");
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::string write_table_csv(const Table& table) {
    std::string out = "id";
    for (const auto& c : table.columns) {
        out += ',';
        out += csv_escape(c);
    }
    if (table.labels) {
        out += ",label";
    }
    out += '\n';
    for (std::size_t r = 0; r < table.row_ids.size(); ++r) {
        out += csv_escape(table.row_ids[r]);
        for (double v : table.values.row(r)) {
            out += ',';
            out += format_double(v);
        }
        if (table.labels) {
            out += ',';
            out += csv_escape((*table.labels)[r]);
        }
        out += '\n';
    }
    return out;
}

Table parse_table_csv(std::string_view text, std::string_view source) {
    Table table;
    std::vector<double> values;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool header_seen = false;
    bool has_label = false;
    std::size_t ncols = 0;
    const std::string src(source);

    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> fields;
        try {
            fields = split_csv_line(line);
        } catch (const DataError& e) {
            throw DataError(src + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!header_seen) {
            if (fields.empty() || fields.front() != "id") {
                throw DataError(src + ": header must start with 'id'");
            }
            has_label = fields.size() >= 2 && fields.back() == "label";
            table.columns.assign(fields.begin() + 1, fields.end() - (has_label ? 1 : 0));
            ncols = table.columns.size();
            if (has_label) {
                table.labels.emplace();
            }
            header_seen = true;
            continue;
        }
        const std::size_t expected = 1 + ncols + (has_label ? 1 : 0);
        if (fields.size() != expected) {
            throw DataError(src + ":" + std::to_string(line_no) + ": expected " + std::to_string(expected) +
                            " fields, found " + std::to_string(fields.size()));
        }
        table.row_ids.push_back(fields[0]);
        for (std::size_t c = 0; c < ncols; ++c) {
            const std::string& f = fields[1 + c];
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v)) {
                throw DataError(src + ":" + std::to_string(line_no) + ": bad numeric value '" + f +
                                "' in column " + table.columns[c]);
            }
            values.push_back(v);
        }
        if (has_label) {
            table.labels->push_back(fields.back());
        }
    }
    if (!header_seen) {
        throw DataError(src + ": empty CSV");
    }
    table.values = Matrix(table.row_ids.size(), ncols, std::move(values));
    return table;
}

Table read_table_csv(const std::filesystem::path& path) {
    return parse_table_csv(read_file(path), path.string());
}

std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

}  // namespace phenonote
