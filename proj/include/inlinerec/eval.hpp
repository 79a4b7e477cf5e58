#pragma once

#include "inlinerec/corpus.hpp"
#include "inlinerec/multiset.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace inlinerec {

struct EvalCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    EvalCounts& operator+=(const EvalCounts& o);
    friend EvalCounts operator+(EvalCounts a, const EvalCounts& b) { return a += b; }
    bool operator==(const EvalCounts&) const = default;

    // TN never enters the ratios.
    double precision() const;
    double recall() const;
    double f1() const;
};

/// Per name with p predicted and g true copies: TP += min(p, g),
/// FP += p - min, FN += g - min. One TN when both multisets are empty.
EvalCounts score_function(const Multiset& predicted, const Multiset& truth);

/// The same tallies split by function name (no TN entry).
std::map<std::string, EvalCounts> score_by_name(const Multiset& predicted, const Multiset& truth);

struct ScoredFunction {
    std::string func_id;
    OptLevel optimization = OptLevel::Unknown;
    EvalCounts counts;
    std::map<std::string, EvalCounts> by_name;
};

ScoredFunction score(const std::string& func_id, OptLevel opt, const Multiset& predicted, const Multiset& truth);

struct EvalReport {
    EvalCounts overall;
    std::map<OptLevel, EvalCounts> by_optimization;
    std::map<std::string, EvalCounts> by_name;
    std::size_t functions = 0;
    std::size_t unique_recovered = 0; // distinct names with TP >= 1

    double precision() const { return overall.precision(); }
    double recall() const { return overall.recall(); }
    double f1() const { return overall.f1(); }
};

EvalReport aggregate(std::span<const ScoredFunction> scored);

struct ReportOptions {
    bool by_optimization = true;
    bool by_name = false;
};

nlohmann::json to_json(const EvalReport& r, const ReportOptions& opts = {.by_optimization = true, .by_name = true});
EvalReport report_from_json(const nlohmann::json& j);
/// Aligned columns, one row per optimization level then an overall row.
std::string format_table(const EvalReport& r, const ReportOptions& opts = {});

struct NameMetrics {
    double frequency = 0;
    double precision = 0;
    double recall = 0;
    double f1 = 0;
};

/// Pearson r of frequency against each metric; nullopt when either
/// coordinate has zero variance or fewer than two names are given.
struct FrequencyCorrelation {
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
    std::size_t names = 0;
};

std::optional<double> pearson(std::span<const double> x, std::span<const double> y);
FrequencyCorrelation frequency_correlation(const std::map<std::string, NameMetrics>& per_name);

} // namespace inlinerec
