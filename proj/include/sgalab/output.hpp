#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sgalab/error.hpp"

namespace sgalab {

// 17 significant digits: enough to round-trip every double.
inline std::string format_real(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string format_optional(const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : std::string(); }

// CSV with two comment lines ahead of the header:
//   # schema: sgalab.<name>.v1
//   # config: <single-line JSON echo>
class CsvWriter {
public:
    CsvWriter(std::string_view schema, std::string_view config_echo, const std::vector<std::string>& columns)
    {
        text_ += "# schema: sgalab.";
        text_ += schema;
        text_ += ".v1\n# config: ";
        text_ += config_echo;
        text_ += '\n';
        row(columns);
    }

    void row(const std::vector<std::string>& fields)
    {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i > 0) {
                text_ += ',';
            }
            text_ += fields[i];
        }
        text_ += '\n';
    }

    const std::string& text() const noexcept { return text_; }

private:
    std::string text_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    out << content;
    if (!out) {
        throw Error("write to " + path.string() + " failed");
    }
}

} // namespace sgalab
