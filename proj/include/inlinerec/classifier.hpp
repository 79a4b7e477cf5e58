#pragma once

#include "inlinerec/tokenizer.hpp"
#include "inlinerec/windowing.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace inlinerec {

// --- prior baseline -------------------------------------------------------------

/// Label frequencies of the training windows; kEmptyLabel included.
struct PriorModel {
    std::map<std::string, std::uint64_t> counts;

    std::uint64_t total() const;
    double probability(const std::string& label) const;
};

/// Throws UsageError on an empty training set.
PriorModel fit_prior(const std::vector<WindowInstance>& train);

/// Samples a label from the prior. The window text is never consulted; the
/// draw is a pure function of (seed, position).
std::string predict_prior(const PriorModel& model, const WindowInstance& window, std::uint64_t seed,
                          std::uint64_t position);

// --- token statistics (multinomial naive Bayes over BPE ids) ----------------------

struct TokenStatsModel {
    struct LabelStats {
        std::uint64_t windows = 0;
        std::uint64_t total_tokens = 0;
        std::unordered_map<TokenId, std::uint64_t> token_counts;
    };

    double alpha = 1.0;
    std::size_t vocab_size = 0;
    std::uint64_t total_windows = 0;
    std::map<std::string, LabelStats> labels; // kEmptyLabel sorts first

    /// log P(label) + sum over window tokens of log P(token | label)
    double score(const std::string& label, const std::map<TokenId, std::uint64_t>& bag) const;
};

/// Labels listed in `declared_labels` but absent from `train` get zero windows.
TokenStatsModel fit_token_stats(const std::vector<WindowInstance>& train, const BpeVocab& vocab, double alpha = 1.0,
                                const std::vector<std::string>& declared_labels = {});

/// Argmax label; exact ties go to EMPTY, then to the lexicographically smaller name.
std::string predict_token_stats(const TokenStatsModel& model, const BpeVocab& vocab, const WindowInstance& window);

// --- handle ------------------------------------------------------------------

struct ExternalModelConfig {
    std::vector<std::string> command; // argv of the model server
    std::size_t batch_size = 32;
    std::uint32_t timeout_ms = 30000;
};

using PredictorHandle = std::variant<PriorModel, TokenStatsModel, ExternalModelConfig>;

std::string_view predictor_kind(const PredictorHandle& h);

nlohmann::json to_json(const PredictorHandle& h);
PredictorHandle predictor_from_json(const nlohmann::json& j);

} // namespace inlinerec
