#include "inlinerec/corpus.hpp"

#include "inlinerec/clex.hpp"
#include "inlinerec/error.hpp"
#include "inlinerec/text.hpp"

#include <algorithm>
#include <set>

namespace inlinerec {

std::string_view to_string(OptLevel o) {
    switch (o) {
    case OptLevel::O0: return "O0";
    case OptLevel::O1: return "O1";
    case OptLevel::Os: return "Os";
    case OptLevel::O2: return "O2";
    case OptLevel::O3: return "O3";
    case OptLevel::Of: return "Of";
    case OptLevel::Unknown: return "unknown";
    }
    return "unknown";
}

std::string_view to_string(FileRole r) {
    return r == FileRole::Original ? "original" : "decompiled";
}

std::optional<OptLevel> parse_opt_level(std::string_view s) {
    static const std::pair<std::string_view, OptLevel> table[] = {
        {"O0", OptLevel::O0}, {"O1", OptLevel::O1}, {"Os", OptLevel::Os},
        {"O2", OptLevel::O2}, {"O3", OptLevel::O3}, {"Of", OptLevel::Of},
        {"unknown", OptLevel::Unknown},
    };
    for (const auto& [name, level] : table)
        if (s == name) return level;
    return std::nullopt;
}

std::optional<FileRole> parse_file_role(std::string_view s) {
    if (s == "original") return FileRole::Original;
    if (s == "decompiled") return FileRole::Decompiled;
    return std::nullopt;
}

SourceFile SourceFile::from_content(std::string path, std::string content, Language lang, OptLevel opt) {
    SourceFile f;
    f.path = std::move(path);
    f.lines = split_lines(content);
    f.content = std::move(content);
    f.language = lang;
    f.optimization = opt;
    return f;
}

// --- TargetFunctionSet ------------------------------------------------------

TargetFunctionSet::TargetFunctionSet(const std::vector<std::string>& names) {
    for (const auto& n : names) add(n);
}

std::string TargetFunctionSet::normalize(std::string_view name) {
    return to_lower(trim(name));
}

void TargetFunctionSet::add(std::string_view name, std::uint64_t frequency) {
    auto norm = normalize(name);
    if (norm.empty()) throw DataError("empty target function name");
    if (!std::all_of(norm.begin(), norm.end(), is_ident_char) || !is_ident_start(norm[0]))
        throw DataError("target function name '" + norm + "' is not an identifier");
    auto pos = std::lower_bound(names_.begin(), names_.end(), norm);
    if (pos != names_.end() && *pos == norm) throw DataError("duplicate target function '" + norm + "'");
    names_.insert(pos, norm);
    frequency_[norm] = frequency;
}

bool TargetFunctionSet::contains(std::string_view name) const {
    return std::binary_search(names_.begin(), names_.end(), normalize(name));
}

std::uint64_t TargetFunctionSet::frequency(std::string_view name) const {
    auto it = frequency_.find(name);
    return it == frequency_.end() ? 0 : it->second;
}

void TargetFunctionSet::set_frequency(std::string_view name, std::uint64_t f) {
    auto it = frequency_.find(name);
    if (it == frequency_.end()) throw UsageError("unknown target function '" + std::string(name) + "'");
    it->second = f;
}

TargetFunctionSet TargetFunctionSet::parse(std::string_view text) {
    TargetFunctionSet set;
    std::size_t lineno = 0;
    for (const auto& raw : split_lines(text)) {
        ++lineno;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto fields = split(line, '\t');
        if (fields.size() > 2) throw DataError("targets line " + std::to_string(lineno) + ": too many fields");
        std::uint64_t freq = 0;
        if (fields.size() == 2) {
            try {
                freq = std::stoull(std::string(trim(fields[1])));
            } catch (const std::exception&) {
                throw DataError("targets line " + std::to_string(lineno) + ": bad frequency '" + fields[1] + "'");
            }
        }
        set.add(fields[0], freq);
    }
    return set;
}

std::string TargetFunctionSet::serialize() const {
    std::string out;
    for (const auto& n : names_) out += n + "\t" + std::to_string(frequency(n)) + "\n";
    return out;
}

// --- FunctionId --------------------------------------------------------------

std::string FunctionId::str() const {
    return file + "::" + name + "::" + std::to_string(ordinal);
}

FunctionId FunctionId::parse(std::string_view s) {
    const auto last = s.rfind("::");
    if (last == std::string_view::npos || last == 0) throw DataError("malformed function id '" + std::string(s) + "'");
    const auto mid = s.rfind("::", last - 1);
    if (mid == std::string_view::npos) throw DataError("malformed function id '" + std::string(s) + "'");
    FunctionId id;
    id.file = std::string(s.substr(0, mid));
    id.name = std::string(s.substr(mid + 2, last - mid - 2));
    const auto ord = s.substr(last + 2);
    if (ord.empty() || !std::all_of(ord.begin(), ord.end(), [](char c) { return c >= '0' && c <= '9'; }))
        throw DataError("malformed function id ordinal in '" + std::string(s) + "'");
    id.ordinal = static_cast<std::uint32_t>(std::stoul(std::string(ord)));
    return id;
}

std::strong_ordering FunctionId::operator<=>(const FunctionId& o) const {
    if (auto c = file <=> o.file; c != 0) return c;
    if (auto c = ordinal <=> o.ordinal; c != 0) return c;
    return name <=> o.name;
}

Multiset DecompiledFunction::truth() const {
    Multiset m;
    for (const auto& l : true_labels) m.add(l.name);
    return m;
}

// --- manifest / loading -------------------------------------------------------

std::vector<ManifestEntry> parse_manifest(std::string_view text) {
    std::vector<ManifestEntry> out;
    std::size_t lineno = 0;
    for (const auto& raw : split_lines(text)) {
        ++lineno;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto fields = split(line, '\t');
        const auto where = "manifest line " + std::to_string(lineno) + ": ";
        if (fields.size() != 3) throw DataError(where + "expected role<TAB>optlevel<TAB>path");
        auto role = parse_file_role(fields[0]);
        if (!role) throw DataError(where + "undeclared role '" + fields[0] + "'");
        auto opt = parse_opt_level(fields[1]);
        if (!opt) throw DataError(where + "unknown optimization level '" + fields[1] + "'");
        if (fields[2].empty()) throw DataError(where + "empty path");
        out.push_back({*role, *opt, fields[2], lineno});
    }
    return out;
}

LoadResult load_corpus(const std::filesystem::path& root, const std::vector<ManifestEntry>& manifest) {
    LoadResult result;
    std::set<std::string> seen;
    for (const auto& entry : manifest) {
        if (!seen.insert(entry.path).second) {
            result.issues.push_back({LoadIssue::Kind::Duplicate, entry.path,
                                     "duplicate manifest entry at line " + std::to_string(entry.manifest_line)});
            continue;
        }
        const auto full = root / entry.path;
        std::error_code ec;
        if (!std::filesystem::is_regular_file(full, ec)) {
            result.issues.push_back({LoadIssue::Kind::Missing, entry.path, "no such file: " + full.string()});
            continue;
        }
        try {
            const auto lang = entry.role == FileRole::Original ? Language::C : Language::PseudoC;
            result.files.push_back(SourceFile::from_content(entry.path, read_file(full.string()), lang, entry.optimization));
        } catch (const Error& e) {
            result.issues.push_back({LoadIssue::Kind::Unreadable, entry.path, e.what()});
        }
    }
    std::sort(result.files.begin(), result.files.end(),
              [](const SourceFile& a, const SourceFile& b) { return a.path < b.path; });
    return result;
}

// --- function splitting --------------------------------------------------------

namespace {

struct PendingHeader {
    std::size_t line = 0;
    std::string name;
};

} // namespace

std::vector<DecompiledFunction> split_functions(const SourceFile& file) {
    if (file.language != Language::PseudoC)
        throw UsageError("split_functions expects pseudo-C input: " + file.path);

    const auto raw = split_raw_lines(file.content);
    std::vector<std::size_t> line_offset;
    line_offset.reserve(raw.size() + 1);
    std::size_t off = 0;
    for (const auto& l : raw) {
        line_offset.push_back(off);
        off += l.text.size() + l.eol.size();
    }
    line_offset.push_back(off);

    const auto masked = split_lines(mask_c_noncode(file.content));

    std::vector<DecompiledFunction> out;
    std::optional<PendingHeader> pending;
    char last_code = 0; // last non-space code char at depth 0
    int depth = 0;
    bool in_function = false;
    std::size_t start_line = 0;
    std::string start_name;
    std::optional<std::size_t> last_end;

    auto emit = [&](std::size_t end_line, bool truncated) {
        DecompiledFunction fn;
        fn.id = {file.path, start_name, static_cast<std::uint32_t>(out.size())};
        fn.first_line = start_line;
        fn.lines.assign(file.lines.begin() + static_cast<std::ptrdiff_t>(start_line),
                        file.lines.begin() + static_cast<std::ptrdiff_t>(end_line) + 1);
        fn.byte_begin = line_offset[start_line];
        fn.byte_end = line_offset[end_line + 1];
        fn.truncated = truncated;
        out.push_back(std::move(fn));
        last_end = end_line;
    };

    for (std::size_t ln = 0; ln < masked.size(); ++ln) {
        const auto& text = masked[ln];
        for (std::size_t i = 0; i < text.size(); ++i) {
            const char c = text[i];
            if (depth > 0) {
                if (c == '{') {
                    ++depth;
                } else if (c == '}' && --depth == 0) {
                    if (in_function) emit(ln, false);
                    in_function = false;
                    pending.reset();
                    last_code = '}';
                }
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\r') continue;
            if (is_ident_start(c)) {
                std::size_t j = i;
                while (j < text.size() && is_ident_char(text[j])) ++j;
                std::string ident = text.substr(i, j - i);
                // look ahead (across lines) for '('
                std::size_t la_line = ln, la = j;
                char next = 0;
                while (la_line < masked.size()) {
                    const auto& t = masked[la_line];
                    while (la < t.size() && (t[la] == ' ' || t[la] == '\t' || t[la] == '\r')) ++la;
                    if (la < t.size()) {
                        next = t[la];
                        break;
                    }
                    ++la_line;
                    la = 0;
                }
                if (next == '(' && !pending) pending = PendingHeader{ln, ident};
                i = j - 1;
                last_code = 'a';
                continue;
            }
            if (c == ';') {
                pending.reset();
            } else if (c == '{') {
                depth = 1;
                in_function = pending.has_value() && last_code == ')';
                if (in_function) {
                    start_line = pending->line;
                    if (last_end && start_line <= *last_end) start_line = *last_end + 1;
                    start_name = pending->name;
                }
                pending.reset();
            }
            last_code = c;
        }
    }
    if (depth > 0 && in_function && !masked.empty()) emit(masked.size() - 1, true);
    return out;
}

} // namespace inlinerec
