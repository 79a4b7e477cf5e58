#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace inlinerec {

// A line split off a byte buffer: content without terminator, plus the
// terminator that ended it ("\n", "\r\n" or "" for an unterminated tail).
struct RawLine {
    std::string text;
    std::string eol;
};

// LF and CRLF both terminate a line. A trailing terminator does not open a
// new empty line, so "a\n" is one line and "" is zero lines.
std::vector<RawLine> split_raw_lines(std::string_view content);
std::vector<std::string> split_lines(std::string_view content);

std::string join_lines(const std::vector<std::string>& lines, std::string_view sep = "\n");

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

bool is_ident_start(char c);
bool is_ident_char(char c);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

std::string hex_encode(std::string_view bytes);
std::string hex_decode(std::string_view hex);

std::string read_file(const std::string& path);
// Writes via a sibling temporary and rename so readers never see a partial file.
void write_file_atomic(const std::string& path, std::string_view content);

} // namespace inlinerec
