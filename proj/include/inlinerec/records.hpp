#pragma once

#include "inlinerec/corpus.hpp"
#include "inlinerec/marker.hpp"
#include "inlinerec/multiset.hpp"
#include "inlinerec/windowing.hpp"

#include <fstream>
#include <functional>
#include <string>

#include <nlohmann/json.hpp>

namespace inlinerec {

// Function record: exactly {id, lines, true_labels: [[name, anchor]...], recovered: [name...]}
nlohmann::json function_to_json(const DecompiledFunction& fn);
DecompiledFunction function_from_json(const nlohmann::json& j);

// Window dataset record: {func_id, start, label, text}
nlohmann::json window_to_json(const WindowInstance& w);
WindowInstance window_from_json(const nlohmann::json& j);

// Prediction record: {func_id, start, label}
struct Prediction {
    std::string func_id;
    std::size_t start = 0;
    std::string label;
};
nlohmann::json prediction_to_json(const Prediction& p);
Prediction prediction_from_json(const nlohmann::json& j);

// Multiset record: {func_id, counts: {name: n}}
struct MultisetRecord {
    std::string func_id;
    Multiset counts;
};
nlohmann::json multiset_to_json(const MultisetRecord& r);
MultisetRecord multiset_from_json(const nlohmann::json& j);

nlohmann::json plan_to_json(const MarkerPlan& plan);
MarkerPlan plan_from_json(const nlohmann::json& j);

/// Calls fn on each parsed line; blank lines are skipped. Parse and schema
/// errors become DataError carrying "<path>:<line>".
void for_each_jsonl(const std::string& path, const std::function<void(const nlohmann::json&)>& fn);

/// Line-JSON output that appears at `path` only once commit() succeeds.
class JsonlWriter {
public:
    explicit JsonlWriter(std::string path);
    ~JsonlWriter();
    JsonlWriter(const JsonlWriter&) = delete;
    JsonlWriter& operator=(const JsonlWriter&) = delete;

    void write(const nlohmann::json& j);
    void commit();
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::string tmp_;
    std::ofstream out_;
    bool committed_ = false;
};

} // namespace inlinerec
