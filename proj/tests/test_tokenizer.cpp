#include "inlinerec/error.hpp"
#include "inlinerec/text.hpp"
#include "inlinerec/tokenizer.hpp"

#include "oracles.hpp"
#include "synthetic.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <random>

using namespace inlinerec;

namespace {

std::vector<std::pair<std::string, std::string>> merge_strings(const BpeVocab& v) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& m : v.merges()) out.push_back({v.token(m.left), v.token(m.right)});
    return out;
}

std::string random_bytes(std::mt19937_64& g, std::size_t max_len) {
    std::string s(g() % (max_len + 1), '\0');
    for (auto& c : s) c = static_cast<char>(g() & 0xff);
    return s;
}

} // namespace

TEST_SUITE("tokenizer") {

TEST_CASE("the first merge of 'aaaa' is (a, a)") {
    const auto v = train_bpe({"aaaa"}, 257, 1);
    REQUIRE(v.merges().size() == 1);
    CHECK(v.token(v.merges()[0].left) == "a");
    CHECK(v.token(v.merges()[0].right) == "a");
    CHECK(v.size() == 257);
    CHECK(v.encode("aaaa") == std::vector<TokenId>{256, 256});
    CHECK(v.encode("aaa") == std::vector<TokenId>{256, 'a'});
}

TEST_CASE("an empty corpus leaves only the byte alphabet") {
    const auto v = train_bpe({}, 25000, 20);
    CHECK(v.size() == 256);
    CHECK(v.merges().empty());
    CHECK(v.encode("ab") == std::vector<TokenId>{'a', 'b'});
}

TEST_CASE("training parameters are validated") {
    CHECK_THROWS_AS(train_bpe({"ab"}, 256, 1), UsageError);
    CHECK_THROWS_AS(train_bpe({"ab"}, 300, 0), UsageError);
}

TEST_CASE("merge sequence on the 20-line fixture equals the naive recount") {
    const auto lines = split_lines(testutil::slurp(FIXTURE_DIR "/bpe_lines.txt"));
    REQUIRE(lines.size() == 20);
    for (const std::uint64_t min_freq : {1u, 2u, 5u}) {
        const auto fast = train_bpe(lines, 400, min_freq);
        const auto naive = oracle::train_bpe(lines, 400, min_freq);
        CHECK(merge_strings(fast) == naive.merges);
    }
}

TEST_CASE("ties go to the lexicographically smaller pair") {
    // (a,b) and (c,d) both occur twice
    const auto v = train_bpe({"cdab", "abcd"}, 257, 1);
    REQUIRE(v.merges().size() == 1);
    CHECK(v.token(v.merges()[0].merged) == "ab");
}

TEST_CASE("decode inverts encode on random byte strings") {
    const auto v = train_bpe(split_lines(testutil::slurp(FIXTURE_DIR "/bpe_lines.txt")), 500, 2);
    std::mt19937_64 g(5);
    for (int i = 0; i < 1000; ++i) {
        const auto s = random_bytes(g, 64);
        CHECK(v.decode(v.encode(s)) == s);
    }
}

TEST_CASE("raising the frequency floor keeps a prefix of the merges") {
    const auto lines = split_lines(testutil::slurp(FIXTURE_DIR "/bpe_lines.txt"));
    std::size_t previous = std::numeric_limits<std::size_t>::max();
    std::vector<std::pair<std::string, std::string>> longest = merge_strings(train_bpe(lines, 2000, 1));
    for (std::uint64_t f = 1; f <= 12; ++f) {
        const auto m = merge_strings(train_bpe(lines, 2000, f));
        CHECK(m.size() <= previous);
        CHECK(std::equal(m.begin(), m.end(), longest.begin()));
        previous = m.size();
    }
}

TEST_CASE("training is deterministic") {
    const auto corpus = synth::generate(3, {.functions = 40}).file.lines;
    CHECK(train_bpe(corpus, 1200, 3).serialize() == train_bpe(corpus, 1200, 3).serialize());
}

TEST_CASE("token counts on a 1000-line body stay within byte bounds") {
    auto lines = synth::generate(11, {.functions = 20, .min_lines = 50, .max_lines = 50}).file.lines;
    lines.resize(1000);
    const auto v = train_bpe(lines, 3000, 2);
    CHECK(v.size() <= 3000);
    CHECK(v.longest_token() > 1);
    for (const auto& l : lines) {
        const auto ids = v.encode(l);
        CHECK(ids.size() <= l.size());
        CHECK(ids.size() * v.longest_token() >= l.size());
        CHECK(v.decode(ids) == l);
    }
}

TEST_CASE("decoding an unknown id names it") {
    const BpeVocab v;
    const std::vector<TokenId> ids = {65, 9999};
    CHECK_THROWS_WITH_AS(v.decode(ids), "unknown token id 9999", DataError);
}

TEST_CASE("vocabularies survive serialization") {
    const auto v = train_bpe(split_lines(testutil::slurp(FIXTURE_DIR "/bpe_lines.txt")), 350, 2);
    const auto back = BpeVocab::parse(v.serialize());
    CHECK(back.serialize() == v.serialize());
    CHECK(back.vocab_size_limit == 350);
    CHECK(back.min_frequency == 2);
    CHECK(back.encode("  iVar1 = 0;") == v.encode("  iVar1 = 0;"));

    CHECK_THROWS_AS(BpeVocab::parse("not a vocab\n"), DataError);
    auto broken = v.serialize();
    broken.resize(broken.size() - 10);
    CHECK_THROWS_AS(BpeVocab::parse(broken), DataError);
}

TEST_CASE("a merged string that already exists reuses its id") {
    BpeVocab v;
    const auto ab = v.add_merge('a', 'b');
    const auto abc1 = v.add_merge(ab, 'c');
    const auto bc = v.add_merge('b', 'c');
    const auto abc2 = v.add_merge('a', bc);
    CHECK(abc1 == abc2);
    CHECK(v.size() == 259);
    CHECK(v.merges().size() == 4);
    CHECK(v.decode(v.encode("abc")) == "abc");
    CHECK(v.encode("abc") == std::vector<TokenId>{abc1});
}

} // TEST_SUITE
