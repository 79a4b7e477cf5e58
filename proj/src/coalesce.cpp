#include "inlinerec/coalesce.hpp"

#include "inlinerec/error.hpp"

#include <algorithm>

namespace inlinerec {

void CoalesceParams::validate() const {
    if (neighbor_span == 0 || retain_threshold == 0 || count_divisor == 0)
        throw UsageError("coalesce parameters other than the bridge gap must be positive");
}

std::vector<std::string> denoise(const std::vector<std::string>& labels, std::size_t n) {
    std::vector<std::string> out = labels;
    const std::size_t len = labels.size();
    for (std::size_t i = 0; i < len; ++i) {
        if (labels[i].empty()) continue;
        const std::size_t lo = i >= n ? i - n : 0;
        const std::size_t hi = std::min(len, i + n + 1);
        bool supported = false;
        for (std::size_t j = lo; j < hi && !supported; ++j)
            supported = j != i && labels[j] == labels[i];
        if (!supported) out[i].clear();
    }
    return out;
}

std::vector<RunSegment> bridge_and_encode(const std::vector<std::string>& labels, std::size_t gap) {
    std::vector<std::string> filled = labels;
    const std::size_t len = filled.size();
    for (std::size_t i = 0; i < len;) {
        if (!filled[i].empty()) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < len && filled[j].empty()) ++j;
        // EMPTY gap [i, j)
        if (i > 0 && j < len && j - i <= gap && filled[i - 1] == filled[j])
            std::fill(filled.begin() + static_cast<std::ptrdiff_t>(i), filled.begin() + static_cast<std::ptrdiff_t>(j),
                      filled[j]);
        i = j;
    }

    std::vector<RunSegment> runs;
    for (std::size_t i = 0; i < len; ++i) {
        if (filled[i].empty()) continue;
        if (!runs.empty() && i > 0 && filled[i - 1] == filled[i])
            ++runs.back().length;
        else
            runs.push_back({filled[i], 1});
    }
    return runs;
}

Multiset finalize(const std::vector<RunSegment>& runs, std::size_t t, std::size_t d) {
    if (d == 0) throw UsageError("count divisor must be positive");
    Multiset out;
    for (const auto& r : runs)
        if (r.length >= t) out.add(r.label, (r.length + d - 1) / d);
    return out;
}

Multiset coalesce(const std::vector<std::string>& labels, const CoalesceParams& p) {
    p.validate();
    return finalize(bridge_and_encode(denoise(labels, p.neighbor_span), p.bridge_gap), p.retain_threshold,
                    p.count_divisor);
}

std::string to_string(const std::vector<RunSegment>& runs) {
    std::string s;
    for (const auto& r : runs) {
        if (!s.empty()) s += ' ';
        s += r.label + "^" + std::to_string(r.length);
    }
    return s;
}

} // namespace inlinerec
