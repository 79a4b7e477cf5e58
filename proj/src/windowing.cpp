#include "inlinerec/windowing.hpp"

#include "inlinerec/error.hpp"
#include "inlinerec/marker.hpp"
#include "inlinerec/rng.hpp"
#include "inlinerec/text.hpp"

#include <algorithm>

namespace inlinerec {

void WindowSpec::validate() const {
    if (height < 1) throw UsageError("window height must be at least 1");
    if (stride < 1) throw UsageError("window stride must be at least 1");
    if (mode == Mode::Centered && before + after + 1 > kMaxCenteredSpan)
        throw UsageError("centered window exceeds " + std::to_string(kMaxCenteredSpan) + " lines");
}

std::string WindowInstance::text() const {
    return join_lines(lines);
}

namespace {

WindowInstance make_window(const DecompiledFunction& body, std::size_t start, std::size_t span) {
    WindowInstance w;
    w.func_id = body.id.str();
    w.start = start;
    w.span = span;
    for (std::size_t i = start; i < start + span; ++i)
        if (!is_marker_line(body.lines[i])) w.lines.push_back(body.lines[i]);
    return w;
}

// Residual label with the smallest anchor in [first, last]; ties by name.
const TrueLabel* first_label(const DecompiledFunction& body, std::size_t first, std::size_t last) {
    const TrueLabel* best = nullptr;
    for (const auto& l : body.true_labels) {
        if (l.anchor < first || l.anchor > last) continue;
        if (!best || l.anchor < best->anchor || (l.anchor == best->anchor && l.name < best->name)) best = &l;
    }
    return best;
}

} // namespace

std::vector<WindowInstance> scan_windows(const DecompiledFunction& body, const WindowSpec& spec) {
    spec.validate();
    if (spec.mode != WindowSpec::Mode::Scan) throw UsageError("scan_windows needs a scan-mode spec");
    const std::size_t n = body.line_count();
    std::vector<WindowInstance> out;
    if (n == 0) return out;

    const std::size_t span = std::min(n, spec.height);
    const std::size_t last_start = n - span;
    for (std::size_t start = 0; start <= last_start; start += spec.stride) {
        auto w = make_window(body, start, span);
        if (const auto* l = first_label(body, start, start + span - 1)) w.label = l->name;
        out.push_back(std::move(w));
    }
    return out;
}

WindowInstance centered_context(const DecompiledFunction& body, std::size_t anchor, const WindowSpec& spec) {
    spec.validate();
    if (spec.mode != WindowSpec::Mode::Centered) throw UsageError("centered_context needs a centered-mode spec");
    if (anchor >= body.line_count())
        throw UsageError("anchor " + std::to_string(anchor) + " outside body of " +
                         std::to_string(body.line_count()) + " lines");
    const auto* l = first_label(body, anchor, anchor);
    if (!l) throw DataError("no marker at line " + std::to_string(anchor) + " of " + body.id.str());
    const std::size_t first = anchor >= spec.before ? anchor - spec.before : 0;
    const std::size_t last = std::min(body.line_count() - 1, anchor + spec.after);
    auto w = make_window(body, first, last - first + 1);
    w.label = l->name;
    return w;
}

std::vector<WindowInstance> rebalance(const std::vector<WindowInstance>& instances, double discard_fraction,
                                      std::uint64_t seed) {
    if (!(discard_fraction >= 0.0 && discard_fraction < 1.0))
        throw UsageError("discard fraction must lie in [0, 1)");
    std::mt19937_64 gen(seed);
    std::vector<WindowInstance> out;
    out.reserve(instances.size());
    for (const auto& w : instances) {
        if (w.labeled()) {
            out.push_back(w);
            continue;
        }
        if (unit_double(gen) >= discard_fraction) out.push_back(w);
    }
    return out;
}

} // namespace inlinerec
