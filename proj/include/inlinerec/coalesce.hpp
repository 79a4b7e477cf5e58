#pragma once

#include "inlinerec/multiset.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace inlinerec {

/// Per-window predictions of one function body, in window order.
/// Empty strings are EMPTY windows.
struct LabelSequence {
    std::string func_id;
    std::vector<std::string> labels;
};

struct RunSegment {
    std::string label;
    std::size_t length = 0;
    bool operator==(const RunSegment&) const = default;
};

struct CoalesceParams {
    std::size_t neighbor_span = 5;
    std::size_t bridge_gap = 3;
    std::size_t retain_threshold = 4;
    std::size_t count_divisor = 20;

    void validate() const;
};

/// Step 1. A named label is erased to EMPTY when no equal label occurs among
/// the up-to-n positions before it and none among the up-to-n after it.
/// All positions are judged against the input sequence.
std::vector<std::string> denoise(const std::vector<std::string>& labels, std::size_t neighbor_span);

/// Step 2. Gaps of at most `bridge_gap` EMPTYs with the same label on both
/// sides are filled with that label; then maximal runs of one named label
/// are run-length encoded.
std::vector<RunSegment> bridge_and_encode(const std::vector<std::string>& labels, std::size_t bridge_gap);

/// Step 3. Runs shorter than `retain_threshold` are dropped; a run of length
/// r contributes ceil(r / count_divisor) invocations.
Multiset finalize(const std::vector<RunSegment>& runs, std::size_t retain_threshold, std::size_t count_divisor);

Multiset coalesce(const std::vector<std::string>& labels, const CoalesceParams& params = {});
inline Multiset coalesce(const LabelSequence& seq, const CoalesceParams& params = {}) {
    return coalesce(seq.labels, params);
}

std::string to_string(const std::vector<RunSegment>& runs);

} // namespace inlinerec
