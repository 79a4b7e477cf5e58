#include "inlinerec/eval.hpp"

#include "inlinerec/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <nlohmann/json.hpp>

namespace inlinerec {

EvalCounts& EvalCounts::operator+=(const EvalCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
}

double EvalCounts::precision() const {
    return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double EvalCounts::recall() const {
    return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double EvalCounts::f1() const {
    const double p = precision();
    const double r = recall();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

std::map<std::string, EvalCounts> score_by_name(const Multiset& predicted, const Multiset& truth) {
    std::set<std::string> names;
    for (const auto& [n, _] : predicted) names.insert(n);
    for (const auto& [n, _] : truth) names.insert(n);
    std::map<std::string, EvalCounts> out;
    for (const auto& n : names) {
        const auto p = predicted.count(n);
        const auto g = truth.count(n);
        const auto hit = std::min(p, g);
        out[n] = {hit, p - hit, g - hit, 0};
    }
    return out;
}

EvalCounts score_function(const Multiset& predicted, const Multiset& truth) {
    EvalCounts c;
    for (const auto& [_, per] : score_by_name(predicted, truth)) c += per;
    if (predicted.empty() && truth.empty()) c.tn = 1;
    return c;
}

ScoredFunction score(const std::string& func_id, OptLevel opt, const Multiset& predicted, const Multiset& truth) {
    ScoredFunction s;
    s.func_id = func_id;
    s.optimization = opt;
    s.by_name = score_by_name(predicted, truth);
    s.counts = score_function(predicted, truth);
    return s;
}

EvalReport aggregate(std::span<const ScoredFunction> scored) {
    EvalReport r;
    for (const auto& s : scored) {
        r.overall += s.counts;
        r.by_optimization[s.optimization] += s.counts;
        for (const auto& [name, c] : s.by_name) r.by_name[name] += c;
        ++r.functions;
    }
    r.unique_recovered = static_cast<std::size_t>(
        std::count_if(r.by_name.begin(), r.by_name.end(), [](const auto& kv) { return kv.second.tp >= 1; }));
    return r;
}

namespace {

nlohmann::json counts_json(const EvalCounts& c) {
    return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn},
            {"precision", c.precision()}, {"recall", c.recall()}, {"f1", c.f1()}};
}

EvalCounts counts_from_json(const nlohmann::json& j) {
    return {j.at("tp").get<std::uint64_t>(), j.at("fp").get<std::uint64_t>(), j.at("fn").get<std::uint64_t>(),
            j.value("tn", std::uint64_t{0})};
}

} // namespace

nlohmann::json to_json(const EvalReport& r, const ReportOptions& opts) {
    nlohmann::json j;
    j["overall"] = counts_json(r.overall);
    j["functions"] = r.functions;
    j["unique_functions_recovered"] = r.unique_recovered;
    if (opts.by_optimization) {
        auto& o = j["by_optimization"] = nlohmann::json::object();
        for (const auto& [opt, c] : r.by_optimization) o[std::string(to_string(opt))] = counts_json(c);
    }
    if (opts.by_name) {
        auto& o = j["by_name"] = nlohmann::json::object();
        for (const auto& [name, c] : r.by_name) o[name] = counts_json(c);
    }
    return j;
}

EvalReport report_from_json(const nlohmann::json& j) {
    try {
        EvalReport r;
        r.overall = counts_from_json(j.at("overall"));
        r.functions = j.value("functions", std::size_t{0});
        r.unique_recovered = j.value("unique_functions_recovered", std::size_t{0});
        if (j.contains("by_optimization"))
            for (const auto& [k, v] : j.at("by_optimization").items()) {
                auto opt = parse_opt_level(k);
                if (!opt) throw DataError("report has unknown optimization level '" + k + "'");
                r.by_optimization[*opt] = counts_from_json(v);
            }
        if (j.contains("by_name"))
            for (const auto& [k, v] : j.at("by_name").items()) r.by_name[k] = counts_from_json(v);
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed report: ") + e.what());
    }
}

std::string format_table(const EvalReport& r, const ReportOptions& opts) {
    std::string out;
    char buf[160];
    auto row = [&](const std::string& key, const EvalCounts& c) {
        std::snprintf(buf, sizeof buf, "%-24s %8llu %8llu %8llu %8llu %9.3f %9.3f %9.3f\n", key.c_str(),
                      static_cast<unsigned long long>(c.tp), static_cast<unsigned long long>(c.fp),
                      static_cast<unsigned long long>(c.fn), static_cast<unsigned long long>(c.tn), c.precision(),
                      c.recall(), c.f1());
        out += buf;
    };
    std::snprintf(buf, sizeof buf, "%-24s %8s %8s %8s %8s %9s %9s %9s\n", "key", "TP", "FP", "FN", "TN", "precision",
                  "recall", "f1");
    out += buf;
    if (opts.by_optimization)
        for (const auto& [opt, c] : r.by_optimization) row(std::string(to_string(opt)), c);
    if (opts.by_name)
        for (const auto& [name, c] : r.by_name) row(name, c);
    row("overall", r.overall);
    out += "unique functions recovered: " + std::to_string(r.unique_recovered) + "\n";
    return out;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw UsageError("pearson needs equally long samples");
    const std::size_t n = x.size();
    if (n < 2) return std::nullopt;
    auto constant = [](std::span<const double> v) { return std::ranges::all_of(v, [&](double a) { return a == v[0]; }); };
    if (constant(x) || constant(y)) return std::nullopt;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

FrequencyCorrelation frequency_correlation(const std::map<std::string, NameMetrics>& per_name) {
    std::vector<double> f, p, r, f1;
    for (const auto& [_, m] : per_name) {
        f.push_back(m.frequency);
        p.push_back(m.precision);
        r.push_back(m.recall);
        f1.push_back(m.f1);
    }
    FrequencyCorrelation out;
    out.names = per_name.size();
    out.precision = pearson(f, p);
    out.recall = pearson(f, r);
    out.f1 = pearson(f, f1);
    return out;
}

} // namespace inlinerec
