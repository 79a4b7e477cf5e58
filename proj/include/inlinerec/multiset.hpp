#pragma once

#include <cstdint>
#include <initializer_list>
#include <map>
#include <string>
#include <utility>

namespace inlinerec {

/// Function name -> invocation count. Stored counts are always positive;
/// a missing key reads as zero.
class Multiset {
public:
    using Map = std::map<std::string, std::uint64_t>;

    Multiset() = default;
    Multiset(std::initializer_list<std::pair<const std::string, std::uint64_t>> init);

    void add(const std::string& name, std::uint64_t n = 1);
    /// Signed entry point for untrusted input; negative counts throw DataError.
    void add_signed(const std::string& name, std::int64_t n);
    /// Removes up to n copies; returns how many were actually removed.
    std::uint64_t remove(const std::string& name, std::uint64_t n = 1);

    std::uint64_t count(const std::string& name) const;
    std::uint64_t total() const;
    bool empty() const { return counts_.empty(); }
    std::size_t distinct() const { return counts_.size(); }

    const Map& entries() const { return counts_; }
    auto begin() const { return counts_.begin(); }
    auto end() const { return counts_.end(); }

    bool contains(const Multiset& sub) const;

    friend bool operator==(const Multiset&, const Multiset&) = default;

private:
    Map counts_;
};

/// Multiset sum: per-name counts add.
Multiset operator+(const Multiset& a, const Multiset& b);

std::string to_string(const Multiset& m);

} // namespace inlinerec
