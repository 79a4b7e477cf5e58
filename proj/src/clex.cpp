#include "inlinerec/clex.hpp"

namespace inlinerec {

namespace {

void blank(std::string& out, std::size_t i) {
    if (out[i] != '\n' && out[i] != '\r') out[i] = ' ';
}

} // namespace

std::string mask_c_noncode(std::string_view src, bool mask_preprocessor) {
    std::string out(src);
    const std::size_t n = src.size();
    bool line_start = true; // only whitespace seen since last newline
    std::size_t i = 0;
    while (i < n) {
        const char c = src[i];
        if (c == '\n') {
            line_start = true;
            ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '/') {
            while (i < n && src[i] != '\n') blank(out, i++);
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '*') {
            blank(out, i++);
            blank(out, i++);
            while (i < n && !(src[i] == '*' && i + 1 < n && src[i + 1] == '/')) blank(out, i++);
            if (i < n) {
                blank(out, i++);
                blank(out, i++);
            }
            line_start = false;
            continue;
        }
        if (c == '"' || c == '\'') {
            blank(out, i++);
            while (i < n && src[i] != c && src[i] != '\n') {
                if (src[i] == '\\' && i + 1 < n) blank(out, i++);
                blank(out, i++);
            }
            if (i < n && src[i] == c) blank(out, i++);
            line_start = false;
            continue;
        }
        if (c == '#' && line_start && mask_preprocessor) {
            while (i < n) {
                if (src[i] == '\n') {
                    // continuation: backslash (optionally followed by \r) before newline
                    std::size_t j = i;
                    if (j > 0 && src[j - 1] == '\r') --j;
                    if (j > 0 && src[j - 1] == '\\') {
                        ++i;
                        continue;
                    }
                    break;
                }
                blank(out, i++);
            }
            continue;
        }
        if (c != ' ' && c != '\t' && c != '\r') line_start = false;
        ++i;
    }
    return out;
}

} // namespace inlinerec
