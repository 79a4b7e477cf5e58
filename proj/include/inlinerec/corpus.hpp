#pragma once

#include "inlinerec/multiset.hpp"

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace inlinerec {

enum class Language { C, PseudoC };
enum class OptLevel { O0, O1, Os, O2, O3, Of, Unknown };
enum class FileRole { Original, Decompiled };

std::string_view to_string(OptLevel o);
std::string_view to_string(FileRole r);
std::optional<OptLevel> parse_opt_level(std::string_view s);
std::optional<FileRole> parse_file_role(std::string_view s);

struct SourceFile {
    std::string path;
    std::string content;
    std::vector<std::string> lines; // content split on LF / CRLF, 0-based
    Language language = Language::C;
    OptLevel optimization = OptLevel::Unknown;

    static SourceFile from_content(std::string path, std::string content, Language lang,
                                   OptLevel opt = OptLevel::Unknown);
    std::size_t line_count() const { return lines.size(); }
};

/// Library-function names to recover, case-normalized (lowercase).
class TargetFunctionSet {
public:
    TargetFunctionSet() = default;
    explicit TargetFunctionSet(const std::vector<std::string>& names);

    static std::string normalize(std::string_view name);

    /// Adds a name; throws DataError on empty or duplicate (after normalization).
    void add(std::string_view name, std::uint64_t frequency = 0);
    bool contains(std::string_view name) const;
    std::uint64_t frequency(std::string_view name) const;
    void set_frequency(std::string_view name, std::uint64_t f);

    const std::vector<std::string>& names() const { return names_; }
    std::size_t size() const { return names_.size(); }
    bool empty() const { return names_.empty(); }

    /// One name per line, optionally `name<TAB>frequency`; '#' comments allowed.
    static TargetFunctionSet parse(std::string_view text);
    std::string serialize() const;

private:
    std::vector<std::string> names_; // sorted
    std::map<std::string, std::uint64_t, std::less<>> frequency_;
};

struct FunctionId {
    std::string file;
    std::string name;
    std::uint32_t ordinal = 0;

    /// "<file>::<name>::<ordinal>"
    std::string str() const;
    static FunctionId parse(std::string_view s);

    // file order first, then position within the file
    std::strong_ordering operator<=>(const FunctionId& o) const;
    bool operator==(const FunctionId& o) const = default;
};

/// A residual ground-truth invocation: which function, anchored at which body line.
struct TrueLabel {
    std::string name;
    std::size_t anchor = 0;
    bool operator==(const TrueLabel&) const = default;
};

struct DecompiledFunction {
    FunctionId id;
    std::vector<std::string> lines;
    std::vector<TrueLabel> true_labels;
    Multiset decompiler_recovered;

    // provenance inside the source file
    std::size_t first_line = 0;
    std::size_t byte_begin = 0;
    std::size_t byte_end = 0;
    bool truncated = false; // unbalanced braces: body ran to end of file

    std::size_t line_count() const { return lines.size(); }
    Multiset truth() const;
};

// --- manifest -------------------------------------------------------------

struct ManifestEntry {
    FileRole role = FileRole::Decompiled;
    OptLevel optimization = OptLevel::Unknown;
    std::string path;
    std::size_t manifest_line = 0;
};

/// `role<TAB>optlevel<TAB>path` per line; blank lines and '#' comments skipped.
/// Unknown roles, optimization levels or field counts throw DataError.
std::vector<ManifestEntry> parse_manifest(std::string_view text);

struct LoadIssue {
    enum class Kind { Missing, Duplicate, Unreadable };
    Kind kind;
    std::string path;
    std::string message;
};

struct LoadResult {
    std::vector<SourceFile> files; // sorted by path
    std::vector<LoadIssue> issues;
};

LoadResult load_corpus(const std::filesystem::path& root, const std::vector<ManifestEntry>& manifest);

/// Splits pseudo-C into function bodies: a header line (identifier followed by
/// a parenthesized parameter list) through the brace that closes its body.
/// Text outside bodies is dropped. Throws UsageError for non-PseudoC input.
std::vector<DecompiledFunction> split_functions(const SourceFile& file);

} // namespace inlinerec
