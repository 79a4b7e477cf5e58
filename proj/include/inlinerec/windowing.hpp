#pragma once

#include "inlinerec/corpus.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace inlinerec {

/// Label value meaning "no library invocation in this window".
inline const std::string kEmptyLabel;

inline constexpr std::size_t kDefaultWindowHeight = 20;
inline constexpr std::size_t kMaxCenteredSpan = 512;

struct WindowSpec {
    enum class Mode { Scan, Centered };

    std::size_t height = kDefaultWindowHeight;
    std::size_t stride = 1;
    Mode mode = Mode::Scan;
    std::size_t before = 10; // centered mode only
    std::size_t after = 10;

    /// Throws UsageError when the spec breaks its invariants.
    void validate() const;
};

struct WindowInstance {
    std::string func_id;
    std::size_t start = 0; // first body line covered
    std::size_t span = 0;  // body lines covered, marker lines included
    std::vector<std::string> lines; // covered lines minus marker lines
    std::string label;     // kEmptyLabel or a target name

    std::string text() const;
    bool labeled() const { return !label.empty(); }
};

/// Overlapping fixed-height windows; a body no taller than the window yields
/// one whole-body window. Each window takes the label of the residual marker
/// with the smallest anchor inside it (ties by name).
std::vector<WindowInstance> scan_windows(const DecompiledFunction& body, const WindowSpec& spec);

/// Window [anchor - before, anchor + after] clipped to the body, labeled with
/// the marker at the anchor. Throws DataError if there is none.
WindowInstance centered_context(const DecompiledFunction& body, std::size_t anchor, const WindowSpec& spec);

/// Keeps every labeled instance and each EMPTY one with probability
/// 1 - discard_fraction, using a seeded generator. Order is preserved.
std::vector<WindowInstance> rebalance(const std::vector<WindowInstance>& instances, double discard_fraction,
                                      std::uint64_t seed);

} // namespace inlinerec
