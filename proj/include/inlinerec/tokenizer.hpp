#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace inlinerec {

using TokenId = std::uint32_t;

inline constexpr std::size_t kDefaultVocabSize = 25000;
inline constexpr std::uint64_t kDefaultMinFrequency = 20;

struct BpeMerge {
    TokenId left = 0;
    TokenId right = 0;
    TokenId merged = 0;
};

/// Byte-level BPE vocabulary. Ids 0..255 are the raw bytes; merged tokens
/// follow densely in the order they were first created.
class BpeVocab {
public:
    BpeVocab(); // base bytes only

    std::size_t size() const { return tokens_.size(); }
    const std::vector<BpeMerge>& merges() const { return merges_; }
    const std::string& token(TokenId id) const { return tokens_.at(id); }
    std::size_t longest_token() const;

    std::size_t vocab_size_limit = kDefaultVocabSize;
    std::uint64_t min_frequency = kDefaultMinFrequency;

    /// Repeatedly merges the leftmost adjacent pair with the lowest merge rank.
    std::vector<TokenId> encode(std::string_view text) const;
    /// Throws DataError naming the first unknown id.
    std::string decode(std::span<const TokenId> ids) const;

    /// Text format: header, `[merges]` section of `rank<TAB>left<TAB>right`
    /// and `[ids]` section of `id<TAB>token`, tokens hex-encoded bytes.
    std::string serialize() const;
    static BpeVocab parse(std::string_view text);

    /// Appends a merge of two existing tokens; reuses the id if the merged
    /// byte string already exists.
    TokenId add_merge(TokenId left, TokenId right);

private:
    struct PairHash {
        std::size_t operator()(std::pair<TokenId, TokenId> p) const noexcept {
            return (static_cast<std::size_t>(p.first) << 32) ^ p.second;
        }
    };

    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId> token_to_id_;
    std::vector<BpeMerge> merges_;
    std::unordered_map<std::pair<TokenId, TokenId>, std::size_t, PairHash> rank_;
};

/// Standard BPE training: repeatedly merge the most frequent adjacent pair
/// (count >= min_frequency) until the vocabulary holds vocab_size tokens or
/// no pair qualifies. Ties go to the lexicographically smaller (left, right)
/// byte-string pair. Each corpus text is an independent byte sequence.
BpeVocab train_bpe(const std::vector<std::string>& corpus, std::size_t vocab_size, std::uint64_t min_frequency);

} // namespace inlinerec
