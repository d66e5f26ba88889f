#include "fwa/csv.hpp"

#include "fwa/common.hpp"

#include <charconv>

namespace fwa {

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header) {
    open(path, header);
}

void CsvWriter::open(const std::string& path, const std::vector<std::string>& header) {
    out_.open(path, std::ios::binary);
    if (!out_) throw ConfigError("cannot open output file: " + path);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out_ << ',';
        out_ << header[i];
    }
    out_ << '\n';
}

CsvWriter& CsvWriter::field(double v) {
    if (row_started_) out_ << ',';
    out_ << format_double(v);
    row_started_ = true;
    return *this;
}

CsvWriter& CsvWriter::field(std::int64_t v) {
    if (row_started_) out_ << ',';
    out_ << v;
    row_started_ = true;
    return *this;
}

CsvWriter& CsvWriter::field(const std::string& v) {
    if (row_started_) out_ << ',';
    out_ << v;
    row_started_ = true;
    return *this;
}

void CsvWriter::end_row() {
    out_ << '\n';
    row_started_ = false;
}

} // namespace fwa
