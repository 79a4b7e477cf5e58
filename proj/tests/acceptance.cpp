// Acceptance run: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include "inlinerec/classifier.hpp"
#include "inlinerec/coalesce.hpp"
#include "inlinerec/combine.hpp"
#include "inlinerec/eval.hpp"
#include "inlinerec/marker.hpp"
#include "inlinerec/text.hpp"
#include "inlinerec/tokenizer.hpp"
#include "inlinerec/windowing.hpp"

#include "oracles.hpp"
#include "synthetic.hpp"
#include "test_util.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

using namespace inlinerec;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;
    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

int failures = 0;

void criterion(int id, const char* title, double limit_ms, const std::function<void(Outcome&)>& body) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.require(false, std::string("exception: ") + e.what());
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (limit_ms > 0 && ms > limit_ms) o.require(false, "took " + std::to_string(ms) + " ms, limit " + std::to_string(limit_ms));
    std::printf("[%s] %2d %-48s %10.2f ms%s%s\n", o.ok ? "PASS" : "FAIL", id, title, ms, o.detail.empty() ? "" : "  ",
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.ok) ++failures;
}

std::vector<std::string> seq(std::initializer_list<const char*> xs) {
    std::vector<std::string> v;
    for (const auto* x : xs) v.push_back(std::string(x) == "x" ? "" : x);
    return v;
}

// --- end-to-end helpers on the synthetic corpus ------------------------------------

struct Scored {
    double model_f1 = 0;    // coalesced predictions against residual truth
    double combined_f1 = 0; // plus decompiler recoveries against every surviving marker
};

using Labeler = std::function<std::string(const WindowInstance&, std::uint64_t position)>;

Scored end_to_end(const std::vector<DecompiledFunction>& fns, const Labeler& label) {
    std::vector<ScoredFunction> model, combined;
    std::uint64_t position = 0;
    for (const auto& fn : fns) {
        LabelSequence s{fn.id.str(), {}};
        for (const auto& w : scan_windows(fn, {})) s.labels.push_back(label(w, position++));
        const auto recovered = coalesce(s);
        const auto removed = reconcile(extract_markers(fn).markers, fn.decompiler_recovered).removed;
        model.push_back(score(s.func_id, OptLevel::Unknown, recovered, fn.truth()));
        combined.push_back(score(s.func_id, OptLevel::Unknown, combine(recovered, fn.decompiler_recovered),
                                 fn.truth() + removed));
    }
    return {aggregate(model).f1(), aggregate(combined).f1()};
}

std::vector<WindowInstance> all_windows(const std::vector<DecompiledFunction>& fns) {
    std::vector<WindowInstance> out;
    for (const auto& fn : fns)
        for (auto& w : scan_windows(fn, {})) out.push_back(std::move(w));
    return out;
}

struct SyntheticSplit {
    synth::Corpus train, test;
    std::vector<WindowInstance> train_windows;
    double empty_fraction = 0;
    std::size_t distinct_labels = 0;
};

const SyntheticSplit& synthetic() {
    static const SyntheticSplit s = [] {
        SyntheticSplit s;
        s.train = synth::generate(1001, {.functions = 600, .cover_all_labels = true}, "train.c");
        s.test = synth::generate(2002, {.functions = 300}, "test.c");
        s.train_windows = all_windows(s.train.functions);
        std::set<std::string> labels;
        std::size_t empty = 0;
        for (const auto& w : s.train_windows) {
            if (w.labeled()) labels.insert(w.label);
            else ++empty;
        }
        s.empty_fraction = static_cast<double>(empty) / static_cast<double>(s.train_windows.size());
        s.distinct_labels = labels.size();
        return s;
    }();
    return s;
}

double prior_worst_model_f1 = 0;
double prior_mean_combined_f1 = 0;

} // namespace

int main() {
    criterion(1, "coalescing golden trace", 1.0, [](Outcome& o) {
        const auto s = seq({"a", "a", "x", "x", "a", "a", "b", "b", "b", "b", "b", "x", "c", "x", "x", "x", "x", "c", "d", "c"});
        const auto runs = bridge_and_encode(denoise(s, 5), 3);
        o.require(to_string(runs) == "a^6 b^5 c^1 c^3", "runs " + to_string(runs));
        const auto ms = finalize(runs, 4, 20);
        o.require(ms == Multiset{{"a", 1}, {"b", 1}}, "multiset " + to_string(ms));
        o.require(coalesce(s) == ms, "coalesce disagrees with the staged result");
    });

    criterion(2, "coalescing oracle equivalence (10,000 seqs)", 5000.0, [](Outcome& o) {
        std::mt19937_64 g(424242);
        std::size_t mismatches = 0;
        for (int i = 0; i < 10000; ++i) {
            const std::size_t alphabet = 1 + g() % 4;
            std::vector<std::string> s(g() % 31);
            for (auto& l : s) {
                const auto k = g() % (alphabet + 1);
                l = k == 0 ? "" : std::string(1, static_cast<char>('a' + k - 1));
            }
            if (oracle::as_map(coalesce(s)) != oracle::coalesce(s)) ++mismatches;
        }
        o.require(mismatches == 0, std::to_string(mismatches) + " mismatches");
    });

    criterion(3, "scoring rules and exhaustive small pairs", 10000.0, [](Outcome& o) {
        auto is = [](const EvalCounts& c, std::uint64_t tp, std::uint64_t fp, std::uint64_t fn, std::uint64_t tn) {
            return c == EvalCounts{tp, fp, fn, tn};
        };
        o.require(is(score_function({}, {}), 0, 0, 0, 1), "empty/empty is not one TN");
        o.require(is(score_function({{"func1", 1}}, {{"func1", 1}}), 1, 0, 0, 0), "match is not TP");
        o.require(is(score_function({{"func1", 1}}, {}), 0, 1, 0, 0), "spurious is not FP");
        o.require(is(score_function({}, {{"func1", 1}}), 0, 0, 1, 0), "miss is not FN");
        o.require(is(score_function({{"func1", 1}}, {{"func2", 1}}), 0, 1, 1, 0), "wrong name is not FP+FN");
        const auto all = oracle::small_multisets({"a", "b", "c"}, 5);
        std::size_t mismatches = 0;
        for (const auto& p : all)
            for (const auto& t : all) {
                const auto want = oracle::score(p, t);
                if (!is(score_function(p, t), want.tp, want.fp, want.fn, want.tn)) ++mismatches;
            }
        o.require(mismatches == 0, std::to_string(mismatches) + " of " + std::to_string(all.size() * all.size()) +
                                       " pairs disagree");
        o.require(all.size() == 56, "expected 56 small multisets");
    });

    criterion(4, "combination of model and decompiler output", 0, [](Outcome& o) {
        const auto c = combine(Multiset{{"sprintf", 2}, {"entercriticalsection", 1}}, Multiset{{"sprintf", 1}});
        o.require(c == Multiset{{"sprintf", 3}, {"entercriticalsection", 1}}, "got " + to_string(c));
    });

    criterion(5, "prior baseline collapses (100 seeded runs)", 30000.0, [](Outcome& o) {
        const auto& s = synthetic();
        o.require(s.empty_fraction >= 0.95, "EMPTY fraction " + std::to_string(s.empty_fraction));
        o.require(s.distinct_labels >= 20, std::to_string(s.distinct_labels) + " labels");
        const auto prior = fit_prior(s.train_windows);
        double worst = 0, sum = 0;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const auto r = end_to_end(s.test.functions, [&](const WindowInstance& w, std::uint64_t pos) {
                return predict_prior(prior, w, seed, pos);
            });
            worst = std::max(worst, r.model_f1);
            sum += r.combined_f1;
        }
        prior_worst_model_f1 = worst;
        prior_mean_combined_f1 = sum / 100;
        o.require(worst < 0.01, "best run F " + std::to_string(worst));
        o.detail = o.ok ? "max F " + std::to_string(worst) : o.detail;
    });

    criterion(6, "token-statistics model beats the prior end to end", 60000.0, [](Outcome& o) {
        const auto& s = synthetic();
        std::vector<std::string> corpus;
        for (const auto& fn : s.train.functions)
            for (const auto& l : fn.lines)
                if (!is_marker_line(l)) corpus.push_back(l);
        const auto vocab = train_bpe(corpus, kDefaultVocabSize, kDefaultMinFrequency);
        const auto train = rebalance(s.train_windows, 0.65, 7);
        const auto model = fit_token_stats(train, vocab, 1.0, s.train.targets.names());
        const auto r = end_to_end(s.test.functions, [&](const WindowInstance& w, std::uint64_t) {
            return predict_token_stats(model, vocab, w);
        });
        o.require(r.combined_f1 >= 0.9, "combined F " + std::to_string(r.combined_f1));
        o.require(r.model_f1 > prior_worst_model_f1, "model F " + std::to_string(r.model_f1) + " vs prior " +
                                                          std::to_string(prior_worst_model_f1));
        o.require(r.combined_f1 > prior_mean_combined_f1, "combined F does not beat the prior's");
        if (o.ok) {
            std::ostringstream d;
            d.precision(3);
            d << "F " << r.model_f1 << " model, " << r.combined_f1 << " combined; prior combined "
              << prior_mean_combined_f1;
            o.detail = d.str();
        }
    });

    criterion(7, "windowing law on 1,000 random bodies", 0, [](Outcome& o) {
        std::mt19937_64 g(777);
        std::size_t bad = 0;
        for (int i = 0; i < 1000; ++i) {
            const std::size_t n = 1 + g() % 120;
            DecompiledFunction fn;
            fn.id = {"r.c", "f", static_cast<std::uint32_t>(i)};
            for (std::size_t k = 0; k < n; ++k) fn.lines.push_back("  x = " + std::to_string(k) + ";");
            std::vector<std::pair<std::string, std::size_t>> markers;
            for (auto k = g() % 5; k > 0; --k) {
                const std::string name(1, static_cast<char>('a' + g() % 4));
                const std::size_t a = g() % n;
                markers.push_back({name, a});
                fn.true_labels.push_back({name, a});
            }
            const auto ws = scan_windows(fn, {});
            const auto expect = oracle::window_labels(n, 20, markers);
            bool ok = ws.size() == std::max<std::size_t>(1, n >= 20 ? n - 20 + 1 : 1) && ws.size() == expect.size();
            for (std::size_t k = 0; ok && k < ws.size(); ++k) ok = ws[k].label == expect[k];
            bad += !ok;
        }
        o.require(bad == 0, std::to_string(bad) + " mismatching bodies");
    });

    criterion(8, "marker round trip on the critical-section fixture", 0, [](Outcome& o) {
        const auto text = testutil::slurp(FIXTURE_DIR "/critical_section.c");
        const auto original = SourceFile::from_content("critical_section.c", text, Language::C);
        const TargetFunctionSet targets({"sprintf", "EnterCriticalSection"});
        const auto inj = inject_markers(original, targets);
        Multiset planted;
        for (const auto& a : inj.plan.assignments) planted.add(a.name);
        o.require(planted == Multiset{{"sprintf", 3}, {"entercriticalsection", 1}}, "planted " + to_string(planted));
        o.require(strip_markers(inj.instrumented.content, inj.plan) == text, "stripping does not restore the file");

        // markers survive in the instrumented text itself
        const auto direct = extract_markers(inj.instrumented.lines);
        Multiset seen;
        for (const auto& m : direct.markers) seen.add(m.name);
        o.require(seen == planted, "extraction from the instrumented file found " + to_string(seen));

        auto dec = testutil::slurp(FIXTURE_DIR "/critical_section.dec.c");
        for (auto p = dec.find("@ARRAY@"); p != std::string::npos; p = dec.find("@ARRAY@"))
            dec.replace(p, 7, inj.plan.array_name);
        const auto fns = split_functions(SourceFile::from_content("critical_section.O2.c", dec, Language::PseudoC));
        o.require(fns.size() == 1, "decompiled fixture should hold one function");
        if (fns.size() != 1) return;
        const auto rec = reconcile(extract_markers(fns[0]).markers, recovered_calls(fns[0], targets));
        Multiset residual;
        for (const auto& l : rec.residual) residual.add(l.name);
        o.require(residual == Multiset{{"sprintf", 2}, {"entercriticalsection", 1}}, "residual " + to_string(residual));
        o.require(rec.removed == Multiset{{"sprintf", 1}}, "removed " + to_string(rec.removed));
    });

    criterion(9, "BPE round trip, determinism and naive merges", 0, [](Outcome& o) {
        const auto lines = split_lines(testutil::slurp(FIXTURE_DIR "/bpe_lines.txt"));
        o.require(lines.size() == 20, "fixture is not 20 lines");
        const auto a = train_bpe(lines, 600, 2);
        const auto b = train_bpe(lines, 600, 2);
        o.require(a.serialize() == b.serialize(), "two training runs differ");
        const auto naive = oracle::train_bpe(lines, 600, 2);
        std::vector<std::pair<std::string, std::string>> got;
        for (const auto& m : a.merges()) got.push_back({a.token(m.left), a.token(m.right)});
        o.require(got == naive.merges, "merge sequence differs from the naive recount");
        std::mt19937_64 g(9);
        std::size_t bad = 0;
        for (int i = 0; i < 10000; ++i) {
            std::string s(g() % 97, '\0');
            for (auto& c : s) c = static_cast<char>(g() & 0xff);
            if (a.decode(a.encode(s)) != s) ++bad;
        }
        o.require(bad == 0, std::to_string(bad) + " strings fail decode(encode(s)) = s");
    });

    criterion(10, "Pearson correlation against the direct formula", 0, [](Outcome& o) {
        std::vector<double> freq, metric;
        std::istringstream in(testutil::slurp(FIXTURE_DIR "/freq_metric.tsv"));
        for (std::string line; std::getline(in, line);) {
            if (line.empty() || line[0] == '#') continue;
            const auto f = split(line, '\t');
            freq.push_back(std::stod(f[1]));
            metric.push_back(std::stod(f[2]));
        }
        o.require(freq.size() == 20, "fixture is not 20 points");
        const auto r = pearson(freq, metric);
        o.require(r.has_value(), "r undefined");
        if (r) o.require(std::abs(*r - oracle::pearson(freq, metric)) <= 1e-12, "r differs from the direct formula");
        std::vector<double> line(freq.size());
        for (std::size_t i = 0; i < freq.size(); ++i) line[i] = 0.0002 * freq[i] + 0.1;
        const auto one = pearson(freq, line);
        o.require(one && std::abs(*one - 1.0) <= 1e-12, "linear fixture does not give r = 1");
    });

    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
