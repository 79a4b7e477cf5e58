#include "inlinerec/multiset.hpp"

#include "inlinerec/error.hpp"

#include <algorithm>

namespace inlinerec {

Multiset::Multiset(std::initializer_list<std::pair<const std::string, std::uint64_t>> init) {
    for (const auto& [name, n] : init) add(name, n);
}

void Multiset::add(const std::string& name, std::uint64_t n) {
    if (n == 0) return;
    counts_[name] += n;
}

void Multiset::add_signed(const std::string& name, std::int64_t n) {
    if (n < 0)
        throw DataError("negative count " + std::to_string(n) + " for '" + name + "'");
    add(name, static_cast<std::uint64_t>(n));
}

std::uint64_t Multiset::remove(const std::string& name, std::uint64_t n) {
    auto it = counts_.find(name);
    if (it == counts_.end()) return 0;
    const auto taken = std::min(n, it->second);
    it->second -= taken;
    if (it->second == 0) counts_.erase(it);
    return taken;
}

std::uint64_t Multiset::count(const std::string& name) const {
    auto it = counts_.find(name);
    return it == counts_.end() ? 0 : it->second;
}

std::uint64_t Multiset::total() const {
    std::uint64_t t = 0;
    for (const auto& [_, n] : counts_) t += n;
    return t;
}

bool Multiset::contains(const Multiset& sub) const {
    return std::all_of(sub.begin(), sub.end(),
                       [&](const auto& kv) { return count(kv.first) >= kv.second; });
}

Multiset operator+(const Multiset& a, const Multiset& b) {
    Multiset out = a;
    for (const auto& [name, n] : b) out.add(name, n);
    return out;
}

std::string to_string(const Multiset& m) {
    std::string s = "{";
    bool first = true;
    for (const auto& [name, n] : m) {
        if (!first) s += ", ";
        first = false;
        s += name + ":" + std::to_string(n);
    }
    return s + "}";
}

} // namespace inlinerec
