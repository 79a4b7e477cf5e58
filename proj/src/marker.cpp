#include "inlinerec/marker.hpp"

#include "inlinerec/clex.hpp"
#include "inlinerec/text.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace inlinerec {

namespace {

bool is_keyword_prefix(std::string_view ident) {
    return ident == "else" || ident == "do";
}

} // namespace

std::vector<CallSite> locate_calls(std::string_view c_source, const TargetFunctionSet& targets) {
    const auto masked = split_lines(mask_c_noncode(c_source));
    std::vector<CallSite> sites;
    int depth = 0;
    int parens = 0;
    bool need_start = true; // next code token opens a statement
    std::size_t stmt_line = 0;
    bool ternary = false;
    char prev = 0; // previous non-space code char
    char prev2 = 0;

    for (std::size_t ln = 0; ln < masked.size(); ++ln) {
        const auto& text = masked[ln];
        for (std::size_t i = 0; i < text.size(); ++i) {
            const char c = text[i];
            if (c == ' ' || c == '\t' || c == '\r') continue;
            if (need_start && depth > 0) {
                stmt_line = ln;
                need_start = false;
                ternary = false;
            }
            if (is_ident_start(c)) {
                std::size_t j = i;
                while (j < text.size() && is_ident_char(text[j])) ++j;
                const std::string_view ident(text.data() + i, j - i);
                std::size_t k = j;
                while (k < text.size() && (text[k] == ' ' || text[k] == '\t' || text[k] == '\r')) ++k;
                const bool member = prev == '.' || (prev == '>' && prev2 == '-');
                if (depth > 0 && k < text.size() && text[k] == '(' && !member) {
                    auto norm = TargetFunctionSet::normalize(ident);
                    if (targets.contains(norm)) sites.push_back({std::move(norm), ln, i, stmt_line});
                }
                if (depth > 0 && is_keyword_prefix(ident) && parens == 0) need_start = true;
                i = j - 1;
                prev2 = prev;
                prev = 'a';
                continue;
            }
            switch (c) {
            case '{':
                ++depth;
                need_start = true;
                break;
            case '}':
                if (depth > 0) --depth;
                need_start = true;
                break;
            case '(':
                ++parens;
                break;
            case ')':
                if (parens > 0) --parens;
                break;
            case ';':
                if (parens == 0) need_start = true;
                break;
            case '?':
                ternary = true;
                break;
            case ':':
                if (parens == 0 && depth > 0) {
                    if (ternary) ternary = false;
                    else need_start = true; // case/default/goto label
                }
                break;
            default:
                break;
            }
            prev2 = prev;
            prev = c;
        }
    }
    return sites;
}

Multiset recovered_calls(const DecompiledFunction& body, const TargetFunctionSet& targets) {
    Multiset m;
    for (const auto& site : locate_calls(join_lines(body.lines), targets)) m.add(site.name);
    return m;
}

std::string marker_array_name(const SourceFile& source) {
    std::string key = source.path;
    key += '\0';
    key += source.content;
    return std::string(kMarkerArrayPrefix) + hex64(fnv1a64(key));
}

bool is_instrumented(std::string_view content) {
    std::size_t pos = 0;
    while ((pos = content.find(kMarkerArrayPrefix, pos)) != std::string_view::npos) {
        const auto tail = content.substr(pos + kMarkerArrayPrefix.size(), 16);
        if (tail.size() == 16 && std::all_of(tail.begin(), tail.end(), [](char c) {
                return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
            }))
            return true;
        pos += kMarkerArrayPrefix.size();
    }
    return false;
}

std::string marker_declaration(const MarkerPlan& plan) {
    return "const char *" + plan.array_name + "[" + std::to_string(plan.array_size) + "];";
}

std::string marker_assignment(const MarkerPlan& plan, const MarkerAssignment& a) {
    return plan.array_name + "[" + std::to_string(a.slot) + "] = \"" + std::string(kMarkerPrefix) + a.name + "\";";
}

InjectionResult inject_markers(const SourceFile& source, const TargetFunctionSet& targets, std::size_t array_size) {
    if (source.language != Language::C) throw UsageError("inject_markers expects original C source: " + source.path);
    if (array_size == 0) throw UsageError("marker array size must be positive");
    if (is_instrumented(source.content)) throw AlreadyInstrumented(source.path + " already carries a marker array");

    const auto sites = locate_calls(source.content, targets);
    if (sites.size() > array_size) {
        std::vector<CallSite> overflow(sites.begin() + static_cast<std::ptrdiff_t>(array_size), sites.end());
        std::string msg = source.path + ": " + std::to_string(sites.size()) + " call sites exceed marker array size " +
                          std::to_string(array_size) + "; overflow at";
        for (const auto& s : overflow) msg += " " + std::to_string(s.line + 1) + ":" + std::to_string(s.column + 1);
        throw MarkerOverflow(msg, overflow);
    }

    MarkerPlan plan;
    plan.file = source.path;
    plan.array_name = marker_array_name(source);
    plan.array_size = array_size;
    plan.no_sites = sites.empty();

    const auto raw = split_raw_lines(source.content);
    std::string eol = "\n";
    for (const auto& l : raw)
        if (!l.eol.empty()) {
            eol = l.eol;
            break;
        }

    std::map<std::size_t, std::vector<std::size_t>> inserts; // statement line -> slots
    for (std::size_t k = 0; k < sites.size(); ++k) {
        plan.assignments.push_back({k, sites[k].name, sites[k].line, sites[k].column});
        inserts[sites[k].statement_line].push_back(k);
    }

    std::string out = marker_declaration(plan) + eol;
    for (std::size_t ln = 0; ln < raw.size(); ++ln) {
        if (auto it = inserts.find(ln); it != inserts.end()) {
            const auto& text = raw[ln].text;
            const auto indent = text.substr(0, text.find_first_not_of(" \t") == std::string::npos
                                                   ? text.size()
                                                   : text.find_first_not_of(" \t"));
            for (auto slot : it->second) out += indent + marker_assignment(plan, plan.assignments[slot]) + eol;
        }
        out += raw[ln].text;
        out += raw[ln].eol;
    }

    InjectionResult result{SourceFile::from_content(source.path, std::move(out), Language::C, source.optimization),
                           std::move(plan)};
    return result;
}

std::string strip_markers(std::string_view instrumented, const MarkerPlan& plan) {
    const auto decl = marker_declaration(plan);
    const auto assign_prefix = plan.array_name + "[";
    std::string out;
    bool first = true;
    for (const auto& l : split_raw_lines(instrumented)) {
        if (first) {
            first = false;
            if (l.text == decl) continue;
        }
        const auto t = trim(l.text);
        if (t.starts_with(assign_prefix) && t.find(std::string(" = \"") + std::string(kMarkerPrefix)) != std::string_view::npos &&
            t.ends_with("\";"))
            continue;
        out += l.text;
        out += l.eol;
    }
    return out;
}

bool is_marker_line(std::string_view line) {
    return line.find(std::string("\"") + std::string(kMarkerPrefix)) != std::string_view::npos;
}

MarkerExtraction extract_markers(const std::vector<std::string>& lines) {
    MarkerExtraction ex;
    const std::string pattern = std::string("\"") + std::string(kMarkerPrefix);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const auto& text = lines[ln];
        std::size_t pos = 0;
        bool malformed = false;
        while ((pos = text.find(pattern, pos)) != std::string::npos) {
            std::size_t b = pos + pattern.size();
            std::size_t e = b;
            while (e < text.size() && is_ident_char(text[e])) ++e;
            if (e == b || e >= text.size() || text[e] != '"' || !is_ident_start(text[b])) {
                malformed = true;
                pos = b;
                continue;
            }
            ex.markers.push_back({to_lower(std::string_view(text).substr(b, e - b)), ln});
            pos = e + 1;
        }
        if (malformed) ex.malformed_lines.push_back(ln);
    }
    return ex;
}

MarkerExtraction extract_markers(const DecompiledFunction& body) {
    return extract_markers(body.lines);
}

Reconciliation reconcile(const std::vector<RecoveredMarker>& markers, const Multiset& recovered) {
    std::vector<std::size_t> order(markers.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return markers[a].line < markers[b].line; });

    Multiset budget = recovered;
    std::vector<bool> dropped(markers.size(), false);
    Reconciliation r;
    for (auto idx : order) {
        const auto& m = markers[idx];
        if (budget.remove(m.name) == 1) {
            dropped[idx] = true;
            r.removed.add(m.name);
        }
    }
    for (std::size_t i = 0; i < markers.size(); ++i)
        if (!dropped[i]) r.residual.push_back({markers[i].name, markers[i].line});
    return r;
}

} // namespace inlinerec
