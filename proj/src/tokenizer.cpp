#include "inlinerec/tokenizer.hpp"

#include "inlinerec/error.hpp"
#include "inlinerec/text.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <queue>
#include <tuple>
#include <set>

namespace inlinerec {

BpeVocab::BpeVocab() {
    tokens_.reserve(256);
    for (int b = 0; b < 256; ++b) {
        tokens_.emplace_back(1, static_cast<char>(b));
        token_to_id_.emplace(tokens_.back(), static_cast<TokenId>(b));
    }
}

std::size_t BpeVocab::longest_token() const {
    std::size_t m = 0;
    for (const auto& t : tokens_) m = std::max(m, t.size());
    return m;
}

TokenId BpeVocab::add_merge(TokenId left, TokenId right) {
    if (left >= tokens_.size() || right >= tokens_.size())
        throw DataError("merge refers to unknown token id");
    std::string merged = tokens_[left] + tokens_[right];
    TokenId id;
    if (auto it = token_to_id_.find(merged); it != token_to_id_.end()) {
        id = it->second;
    } else {
        id = static_cast<TokenId>(tokens_.size());
        tokens_.push_back(merged);
        token_to_id_.emplace(std::move(merged), id);
    }
    rank_.emplace(std::make_pair(left, right), merges_.size());
    merges_.push_back({left, right, id});
    return id;
}

std::vector<TokenId> BpeVocab::encode(std::string_view text) const {
    const std::size_t n = text.size();
    std::vector<TokenId> tok(n);
    for (std::size_t i = 0; i < n; ++i) tok[i] = static_cast<unsigned char>(text[i]);
    if (merges_.empty() || n < 2) return tok;

    // Linked list over positions; a heap of (rank, left position) picks the
    // leftmost lowest-rank adjacent pair at every step.
    constexpr std::size_t nil = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> next(n), prev(n);
    for (std::size_t i = 0; i < n; ++i) {
        next[i] = i + 1 < n ? i + 1 : nil;
        prev[i] = i > 0 ? i - 1 : nil;
    }
    using Entry = std::tuple<std::size_t, std::size_t, TokenId, TokenId>; // rank, pos, left, right
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    auto push = [&](std::size_t i) {
        if (i == nil || next[i] == nil) return;
        auto it = rank_.find({tok[i], tok[next[i]]});
        if (it != rank_.end()) heap.emplace(it->second, i, tok[i], tok[next[i]]);
    };
    for (std::size_t i = 0; i + 1 < n; ++i) push(i);

    std::vector<bool> dead(n, false);
    while (!heap.empty()) {
        const auto [rank, i, left, right] = heap.top();
        heap.pop();
        if (dead[i] || next[i] == nil || tok[i] != left || tok[next[i]] != right) continue;
        const std::size_t j = next[i];
        tok[i] = merges_[rank].merged;
        dead[j] = true;
        next[i] = next[j];
        if (next[j] != nil) prev[next[j]] = i;
        push(prev[i]);
        push(i);
    }
    std::vector<TokenId> out;
    out.reserve(n);
    for (std::size_t i = 0; i != nil; i = next[i]) out.push_back(tok[i]);
    return out;
}

std::string BpeVocab::decode(std::span<const TokenId> ids) const {
    std::string out;
    for (auto id : ids) {
        if (id >= tokens_.size()) throw DataError("unknown token id " + std::to_string(id));
        out += tokens_[id];
    }
    return out;
}

std::string BpeVocab::serialize() const {
    std::string out = "#bpe-vocab\t1\n";
    out += "vocab_size_limit\t" + std::to_string(vocab_size_limit) + "\n";
    out += "min_frequency\t" + std::to_string(min_frequency) + "\n";
    out += "[merges]\n";
    for (std::size_t r = 0; r < merges_.size(); ++r)
        out += std::to_string(r) + "\t" + hex_encode(tokens_[merges_[r].left]) + "\t" +
               hex_encode(tokens_[merges_[r].right]) + "\n";
    out += "[ids]\n";
    for (std::size_t id = 0; id < tokens_.size(); ++id)
        out += std::to_string(id) + "\t" + hex_encode(tokens_[id]) + "\n";
    return out;
}

BpeVocab BpeVocab::parse(std::string_view text) {
    BpeVocab v;
    enum class Section { Header, Merges, Ids } section = Section::Header;
    std::size_t lineno = 0;
    std::size_t expect_rank = 0;
    std::size_t expect_id = 0;
    auto fail = [&](const std::string& why) {
        throw DataError("vocab line " + std::to_string(lineno) + ": " + why);
    };
    auto number = [&](const std::string& s) -> std::uint64_t {
        try {
            std::size_t used = 0;
            auto n = std::stoull(s, &used);
            if (used != s.size()) fail("bad number '" + s + "'");
            return n;
        } catch (const std::logic_error&) {
            fail("bad number '" + s + "'");
        }
        return 0;
    };
    for (const auto& line : split_lines(text)) {
        ++lineno;
        if (line.empty()) continue;
        if (lineno == 1) {
            if (line != "#bpe-vocab\t1") fail("missing '#bpe-vocab 1' header");
            continue;
        }
        if (line == "[merges]") {
            section = Section::Merges;
            continue;
        }
        if (line == "[ids]") {
            section = Section::Ids;
            continue;
        }
        const auto f = split(line, '\t');
        switch (section) {
        case Section::Header:
            if (f.size() != 2) fail("expected key<TAB>value");
            if (f[0] == "vocab_size_limit") v.vocab_size_limit = number(f[1]);
            else if (f[0] == "min_frequency") v.min_frequency = number(f[1]);
            else fail("unknown header key '" + f[0] + "'");
            break;
        case Section::Merges: {
            if (f.size() != 3) fail("expected rank<TAB>left<TAB>right");
            if (number(f[0]) != expect_rank++) fail("merge ranks must be consecutive");
            auto l = v.token_to_id_.find(hex_decode(f[1]));
            auto r = v.token_to_id_.find(hex_decode(f[2]));
            if (l == v.token_to_id_.end() || r == v.token_to_id_.end()) fail("merge constituent not yet defined");
            v.add_merge(l->second, r->second);
            break;
        }
        case Section::Ids:
            if (f.size() != 2) fail("expected id<TAB>token");
            if (number(f[0]) != expect_id) fail("ids must be dense and ordered");
            if (expect_id >= v.tokens_.size() || v.tokens_[expect_id] != hex_decode(f[1]))
                fail("id table disagrees with merges at id " + std::to_string(expect_id));
            ++expect_id;
            break;
        }
    }
    if (expect_id != v.tokens_.size()) throw DataError("vocab id table is incomplete");
    return v;
}

namespace {

using Pair = std::pair<TokenId, TokenId>;

struct PairHashFn {
    std::size_t operator()(Pair p) const noexcept { return (static_cast<std::size_t>(p.first) << 32) ^ p.second; }
};

class PairQueue {
public:
    explicit PairQueue(const BpeVocab& v) : order_(Cmp{&v}) {}

    void update(Pair p, std::int64_t old_count, std::int64_t new_count) {
        if (old_count > 0) order_.erase({old_count, p});
        if (new_count > 0) order_.insert({new_count, p});
    }
    bool empty() const { return order_.empty(); }
    std::pair<std::int64_t, Pair> top() const { return *order_.begin(); }

private:
    struct Cmp {
        const BpeVocab* vocab;
        bool operator()(const std::pair<std::int64_t, Pair>& a, const std::pair<std::int64_t, Pair>& b) const {
            if (a.first != b.first) return a.first > b.first;
            if (a.second == b.second) return false;
            const auto& al = vocab->token(a.second.first);
            const auto& bl = vocab->token(b.second.first);
            if (al != bl) return al < bl;
            return vocab->token(a.second.second) < vocab->token(b.second.second);
        }
    };
    std::set<std::pair<std::int64_t, Pair>, Cmp> order_;
};

} // namespace

BpeVocab train_bpe(const std::vector<std::string>& corpus, std::size_t vocab_size, std::uint64_t min_frequency) {
    if (vocab_size <= 256) throw UsageError("vocab_size must exceed 256");
    if (min_frequency < 1) throw UsageError("min_frequency must be at least 1");

    BpeVocab vocab;
    vocab.vocab_size_limit = vocab_size;
    vocab.min_frequency = min_frequency;

    std::map<std::string, std::int64_t> unique;
    for (const auto& t : corpus)
        if (t.size() > 1) ++unique[t];

    std::vector<std::vector<TokenId>> seqs;
    std::vector<std::int64_t> weight;
    for (const auto& [text, n] : unique) {
        seqs.emplace_back(text.begin(), text.end());
        for (auto& id : seqs.back()) id = static_cast<unsigned char>(id);
        weight.push_back(n);
    }

    std::unordered_map<Pair, std::int64_t, PairHashFn> counts;
    std::unordered_map<Pair, std::vector<std::size_t>, PairHashFn> where;
    for (std::size_t s = 0; s < seqs.size(); ++s) {
        const auto& seq = seqs[s];
        for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
            const Pair p{seq[i], seq[i + 1]};
            counts[p] += weight[s];
            auto& w = where[p];
            if (w.empty() || w.back() != s) w.push_back(s);
        }
    }
    PairQueue queue(vocab);
    for (const auto& [p, n] : counts) queue.update(p, 0, n);

    while (vocab.size() < vocab_size && !queue.empty()) {
        const auto [best_count, best] = queue.top();
        if (static_cast<std::uint64_t>(best_count) < min_frequency) break;
        const TokenId merged = vocab.add_merge(best.first, best.second);

        std::unordered_map<Pair, std::int64_t, PairHashFn> delta;
        auto affected = std::move(where[best]);
        where.erase(best);
        std::sort(affected.begin(), affected.end());
        affected.erase(std::unique(affected.begin(), affected.end()), affected.end());
        for (auto s : affected) {
            auto& seq = seqs[s];
            bool present = false;
            for (std::size_t i = 0; i + 1 < seq.size() && !present; ++i)
                present = seq[i] == best.first && seq[i + 1] == best.second;
            if (!present) continue;
            for (std::size_t i = 0; i + 1 < seq.size(); ++i) delta[{seq[i], seq[i + 1]}] -= weight[s];
            std::vector<TokenId> next;
            next.reserve(seq.size());
            for (std::size_t i = 0; i < seq.size();) {
                if (i + 1 < seq.size() && seq[i] == best.first && seq[i + 1] == best.second) {
                    next.push_back(merged);
                    i += 2;
                } else {
                    next.push_back(seq[i++]);
                }
            }
            seq = std::move(next);
            for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
                const Pair p{seq[i], seq[i + 1]};
                delta[p] += weight[s];
                auto& w = where[p];
                if (w.empty() || w.back() != s) w.push_back(s);
            }
        }
        for (const auto& [p, d] : delta) {
            if (d == 0) continue;
            auto& c = counts[p];
            queue.update(p, c, c + d);
            c += d;
            if (c == 0) counts.erase(p);
        }
    }
    return vocab;
}

} // namespace inlinerec
