#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace fwa {

// Formats a double with shortest round-trip representation (std::to_chars).
// All run outputs go through this so identical runs are byte-identical.
std::string format_double(double v);

class CsvWriter {
public:
    CsvWriter() = default;
    CsvWriter(const std::string& path, const std::vector<std::string>& header);

    void open(const std::string& path, const std::vector<std::string>& header);
    bool is_open() const { return out_.is_open(); }

    CsvWriter& field(double v);
    CsvWriter& field(std::int64_t v);
    CsvWriter& field(int v) { return field(static_cast<std::int64_t>(v)); }
    CsvWriter& field(const std::string& v);
    void end_row();

    void flush() { out_.flush(); }

private:
    std::ofstream out_;
    bool row_started_ = false;
};

} // namespace fwa
