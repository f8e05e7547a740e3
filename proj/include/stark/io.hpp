// CSV and file helpers. Floats are written with 17 significant digits so
// round-tripping is exact; line endings are always LF.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace stark {

std::string format_double(double v);

class CsvWriter {
public:
    explicit CsvWriter(const std::vector<std::string>& header);

    CsvWriter& add(double v);
    CsvWriter& add(long v);
    CsvWriter& add(int v) { return add(static_cast<long>(v)); }
    CsvWriter& add(std::size_t v) { return add(static_cast<long>(v)); }
    CsvWriter& add(const std::string& v);
    CsvWriter& add(const char* v) { return add(std::string(v)); }
    void end_row();

    const std::string& str() const noexcept { return text_; }

private:
    std::string text_;
    bool row_open_ = false;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& data);
std::string hex64(std::uint64_t v);

}  // namespace stark
