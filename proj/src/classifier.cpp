#include "inlinerec/classifier.hpp"

#include "inlinerec/error.hpp"
#include "inlinerec/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace inlinerec {

std::uint64_t PriorModel::total() const {
    std::uint64_t t = 0;
    for (const auto& [_, n] : counts) t += n;
    return t;
}

double PriorModel::probability(const std::string& label) const {
    const auto t = total();
    auto it = counts.find(label);
    if (t == 0 || it == counts.end()) return 0.0;
    return static_cast<double>(it->second) / static_cast<double>(t);
}

PriorModel fit_prior(const std::vector<WindowInstance>& train) {
    if (train.empty()) throw UsageError("fit_prior needs a nonempty training set");
    PriorModel m;
    for (const auto& w : train) ++m.counts[w.label];
    return m;
}

std::string predict_prior(const PriorModel& model, const WindowInstance& /*window*/, std::uint64_t seed,
                          std::uint64_t position) {
    const auto total = model.total();
    if (total == 0) return kEmptyLabel;
    // integer inverse CDF keeps the draw exact for any count table
    const auto u = unit_double(seed, position);
    auto target = static_cast<std::uint64_t>(u * static_cast<double>(total));
    if (target >= total) target = total - 1;
    std::uint64_t cum = 0;
    for (const auto& [label, n] : model.counts) {
        cum += n;
        if (target < cum) return label;
    }
    return model.counts.rbegin()->first;
}

double TokenStatsModel::score(const std::string& label, const std::map<TokenId, std::uint64_t>& bag) const {
    auto it = labels.find(label);
    if (it == labels.end() || it->second.windows == 0 || total_windows == 0)
        return -std::numeric_limits<double>::infinity();
    const auto& st = it->second;
    double s = std::log(static_cast<double>(st.windows) / static_cast<double>(total_windows));
    const double denom = std::log(static_cast<double>(st.total_tokens) + alpha * static_cast<double>(vocab_size));
    for (const auto& [tok, n] : bag) {
        auto c = st.token_counts.find(tok);
        const double cnt = c == st.token_counts.end() ? 0.0 : static_cast<double>(c->second);
        s += static_cast<double>(n) * (std::log(cnt + alpha) - denom);
    }
    return s;
}

namespace {

std::map<TokenId, std::uint64_t> bag_of_tokens(const BpeVocab& vocab, const WindowInstance& w) {
    std::map<TokenId, std::uint64_t> bag;
    for (auto id : vocab.encode(w.text())) ++bag[id];
    return bag;
}

} // namespace

TokenStatsModel fit_token_stats(const std::vector<WindowInstance>& train, const BpeVocab& vocab, double alpha,
                                const std::vector<std::string>& declared_labels) {
    if (!(alpha > 0.0)) throw UsageError("smoothing alpha must be positive");
    TokenStatsModel m;
    m.alpha = alpha;
    m.vocab_size = vocab.size();
    for (const auto& l : declared_labels) m.labels[l];
    for (const auto& w : train) {
        auto& st = m.labels[w.label];
        ++st.windows;
        ++m.total_windows;
        for (auto id : vocab.encode(w.text())) {
            ++st.token_counts[id];
            ++st.total_tokens;
        }
    }
    return m;
}

std::string predict_token_stats(const TokenStatsModel& model, const BpeVocab& vocab, const WindowInstance& window) {
    const auto bag = bag_of_tokens(vocab, window);
    std::string best = kEmptyLabel;
    double best_score = -std::numeric_limits<double>::infinity();
    bool have = false;
    for (const auto& [label, _] : model.labels) {
        const double s = model.score(label, bag);
        if (!have || s > best_score) {
            best = label;
            best_score = s;
            have = true;
        }
    }
    return best;
}

// --- handle / serialization ------------------------------------------------------

std::string_view predictor_kind(const PredictorHandle& h) {
    switch (h.index()) {
    case 0: return "prior";
    case 1: return "token_stats";
    default: return "external";
    }
}

nlohmann::json to_json(const PredictorHandle& h) {
    using nlohmann::json;
    json j;
    j["kind"] = predictor_kind(h);
    if (const auto* p = std::get_if<PriorModel>(&h)) {
        j["counts"] = p->counts;
    } else if (const auto* t = std::get_if<TokenStatsModel>(&h)) {
        j["alpha"] = t->alpha;
        j["vocab_size"] = t->vocab_size;
        j["total_windows"] = t->total_windows;
        json labels = json::array();
        for (const auto& [label, st] : t->labels) {
            std::vector<std::pair<TokenId, std::uint64_t>> counts(st.token_counts.begin(), st.token_counts.end());
            std::sort(counts.begin(), counts.end());
            json c = json::array();
            for (const auto& [id, n] : counts) c.push_back({id, n});
            labels.push_back({{"label", label}, {"windows", st.windows}, {"total_tokens", st.total_tokens}, {"counts", c}});
        }
        j["labels"] = labels;
    } else {
        const auto& e = std::get<ExternalModelConfig>(h);
        j["command"] = e.command;
        j["batch_size"] = e.batch_size;
        j["timeout_ms"] = e.timeout_ms;
    }
    return j;
}

PredictorHandle predictor_from_json(const nlohmann::json& j) {
    try {
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "prior") {
            PriorModel p;
            p.counts = j.at("counts").get<std::map<std::string, std::uint64_t>>();
            return p;
        }
        if (kind == "token_stats") {
            TokenStatsModel t;
            t.alpha = j.at("alpha").get<double>();
            t.vocab_size = j.at("vocab_size").get<std::size_t>();
            t.total_windows = j.at("total_windows").get<std::uint64_t>();
            for (const auto& l : j.at("labels")) {
                auto& st = t.labels[l.at("label").get<std::string>()];
                st.windows = l.at("windows").get<std::uint64_t>();
                st.total_tokens = l.at("total_tokens").get<std::uint64_t>();
                for (const auto& c : l.at("counts"))
                    st.token_counts[c.at(0).get<TokenId>()] = c.at(1).get<std::uint64_t>();
            }
            if (!(t.alpha > 0.0)) throw DataError("token_stats model has non-positive alpha");
            return t;
        }
        if (kind == "external") {
            ExternalModelConfig e;
            e.command = j.at("command").get<std::vector<std::string>>();
            e.batch_size = j.value("batch_size", std::size_t{32});
            e.timeout_ms = j.value("timeout_ms", std::uint32_t{30000});
            if (e.command.empty()) throw DataError("external model needs a command");
            return e;
        }
        throw DataError("unknown predictor kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    }
}

} // namespace inlinerec
