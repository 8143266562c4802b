// io.hpp: Deterministic text formatting and atomic file output
//
// Doubles are written in the shortest form that round-trips (std::to_chars),
// so identical inputs give byte-identical files on any conforming platform.

#pragma once

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <unistd.h>

#include "exactq/errors.hpp"

namespace exactq {

inline std::string format_double(double x) {
    if (x == 0.0) x = 0.0;  // drop the sign of negative zero
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc()) throw Error(ErrorKind::IoError, "number formatting failed");
    return std::string(buf, ptr);
}

/// Empty field for a missing value.
inline std::string format_optional(const std::optional<double>& x) { return x ? format_double(*x) : std::string(); }

/// Comma-separated text with a header row and LF line endings.
class CsvWriter {
public:
    explicit CsvWriter(std::initializer_list<std::string_view> header) {
        for (auto h : header) field(h);
        end_row();
    }

    CsvWriter& field(std::string_view text) {
        if (!at_row_start_) out_ += ',';
        out_ += text;
        at_row_start_ = false;
        return *this;
    }
    CsvWriter& field(double x) { return field(format_double(x)); }
    CsvWriter& field(const std::optional<double>& x) { return field(format_optional(x)); }
    CsvWriter& field(std::size_t n) { return field(std::to_string(n)); }

    void end_row() {
        out_ += '\n';
        at_row_start_ = true;
    }

    const std::string& str() const noexcept { return out_; }

private:
    std::string out_;
    bool at_row_start_{true};
};

inline void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw Error(ErrorKind::IoError, "cannot create output directory '" + dir.string() + "'");
}

/// Writes to a temporary sibling and renames it over `path`, so readers never see partial files.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    static std::atomic<unsigned long> counter{0};
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::IoError, "cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ignored;
            std::filesystem::remove(tmp, ignored);
            throw Error(ErrorKind::IoError, "write to '" + tmp.string() + "' failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        std::filesystem::remove(tmp, ignored);
        throw Error(ErrorKind::IoError, "cannot rename onto '" + path.string() + "': " + ec.message());
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace exactq
