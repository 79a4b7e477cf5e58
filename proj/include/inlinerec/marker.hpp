#pragma once

#include "inlinerec/corpus.hpp"
#include "inlinerec/error.hpp"
#include "inlinerec/multiset.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace inlinerec {

inline constexpr std::string_view kMarkerPrefix = "FUNCMARK:";
inline constexpr std::string_view kMarkerArrayPrefix = "funcmark_arr_";
inline constexpr std::size_t kDefaultMarkerArraySize = 2000;

/// A lexically located call `name(` inside a function body.
struct CallSite {
    std::string name; // normalized target name
    std::size_t line = 0;
    std::size_t column = 0;
    std::size_t statement_line = 0; // line where the enclosing statement starts
};

/// Finds calls to target functions: identifier (case-insensitively in the set)
/// followed by '(' at brace depth > 0, outside comments, literals and
/// preprocessor lines, and not a member access.
std::vector<CallSite> locate_calls(std::string_view c_source, const TargetFunctionSet& targets);

/// Target calls still visible in a decompiled body, i.e. the ones the
/// decompiler itself recovered.
Multiset recovered_calls(const DecompiledFunction& body, const TargetFunctionSet& targets);

struct MarkerAssignment {
    std::size_t slot = 0;
    std::string name;
    std::size_t line = 0;   // call location in the original file
    std::size_t column = 0;
};

struct MarkerPlan {
    std::string file;
    std::string array_name;
    std::size_t array_size = kDefaultMarkerArraySize;
    std::vector<MarkerAssignment> assignments;
    bool no_sites = false; // declaration injected but nothing to mark
};

struct InjectionResult {
    SourceFile instrumented;
    MarkerPlan plan;
};

class MarkerOverflow : public DataError {
public:
    MarkerOverflow(std::string msg, std::vector<CallSite> overflow)
        : DataError(std::move(msg)), overflow_(std::move(overflow)) {}
    const std::vector<CallSite>& overflow() const { return overflow_; }

private:
    std::vector<CallSite> overflow_;
};

class AlreadyInstrumented : public DataError {
public:
    using DataError::DataError;
};

std::string marker_array_name(const SourceFile& source);
bool is_instrumented(std::string_view content);
std::string marker_declaration(const MarkerPlan& plan);
std::string marker_assignment(const MarkerPlan& plan, const MarkerAssignment& a);

/// Adds a global `const char *ARR[array_size];` as the first line and, on its
/// own line before the statement holding each located call, `ARR[k] =
/// "FUNCMARK:<name>";` with a fresh slot k. Original lines are untouched.
InjectionResult inject_markers(const SourceFile& source, const TargetFunctionSet& targets,
                               std::size_t array_size = kDefaultMarkerArraySize);

/// Removes the declaration and every inserted assignment line.
std::string strip_markers(std::string_view instrumented, const MarkerPlan& plan);

struct RecoveredMarker {
    std::string name;
    std::size_t line = 0;
    bool operator==(const RecoveredMarker&) const = default;
};

struct MarkerExtraction {
    std::vector<RecoveredMarker> markers;
    std::vector<std::size_t> malformed_lines;
};

bool is_marker_line(std::string_view line);
MarkerExtraction extract_markers(const std::vector<std::string>& lines);
MarkerExtraction extract_markers(const DecompiledFunction& body);

struct Reconciliation {
    std::vector<TrueLabel> residual;
    Multiset removed;
};

/// Drops, per name, min(#markers, #recovered) markers, earliest line first;
/// the rest become ground truth.
Reconciliation reconcile(const std::vector<RecoveredMarker>& markers, const Multiset& recovered);

} // namespace inlinerec
