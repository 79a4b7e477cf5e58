#include "inlinerec/records.hpp"

#include "inlinerec/error.hpp"
#include "inlinerec/text.hpp"

#include <filesystem>

namespace inlinerec {

using nlohmann::json;

namespace {

template <class F>
auto guarded(const char* what, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed ") + what + " record: " + e.what());
    }
}

} // namespace

json function_to_json(const DecompiledFunction& fn) {
    json labels = json::array();
    for (const auto& l : fn.true_labels) labels.push_back(json::array({l.name, l.anchor}));
    json recovered = json::array();
    for (const auto& [name, n] : fn.decompiler_recovered)
        for (std::uint64_t i = 0; i < n; ++i) recovered.push_back(name);
    return {{"id", fn.id.str()}, {"lines", fn.lines}, {"true_labels", labels}, {"recovered", recovered}};
}

DecompiledFunction function_from_json(const json& j) {
    return guarded("function", [&] {
        DecompiledFunction fn;
        fn.id = FunctionId::parse(j.at("id").get<std::string>());
        fn.lines = j.at("lines").get<std::vector<std::string>>();
        for (const auto& l : j.at("true_labels")) {
            if (!l.is_array() || l.size() != 2) throw DataError("true_labels entries must be [name, anchor]");
            TrueLabel t{l.at(0).get<std::string>(), l.at(1).get<std::size_t>()};
            if (t.anchor >= fn.lines.size())
                throw DataError("anchor " + std::to_string(t.anchor) + " outside " + fn.id.str());
            fn.true_labels.push_back(std::move(t));
        }
        for (const auto& n : j.at("recovered")) fn.decompiler_recovered.add(n.get<std::string>());
        return fn;
    });
}

json window_to_json(const WindowInstance& w) {
    return {{"func_id", w.func_id}, {"start", w.start}, {"label", w.label}, {"text", w.text()}};
}

WindowInstance window_from_json(const json& j) {
    return guarded("window", [&] {
        WindowInstance w;
        w.func_id = j.at("func_id").get<std::string>();
        w.start = j.at("start").get<std::size_t>();
        w.label = j.at("label").get<std::string>();
        w.lines = split_lines(j.at("text").get<std::string>());
        w.span = w.lines.size();
        return w;
    });
}

json prediction_to_json(const Prediction& p) {
    return {{"func_id", p.func_id}, {"start", p.start}, {"label", p.label}};
}

Prediction prediction_from_json(const json& j) {
    return guarded("prediction", [&] {
        return Prediction{j.at("func_id").get<std::string>(), j.at("start").get<std::size_t>(),
                          j.at("label").get<std::string>()};
    });
}

json multiset_to_json(const MultisetRecord& r) {
    json counts = json::object();
    for (const auto& [name, n] : r.counts) counts[name] = n;
    return {{"func_id", r.func_id}, {"counts", counts}};
}

MultisetRecord multiset_from_json(const json& j) {
    return guarded("multiset", [&] {
        MultisetRecord r;
        r.func_id = j.at("func_id").get<std::string>();
        for (const auto& [name, n] : j.at("counts").items()) {
            if (!n.is_number_integer()) throw DataError("count for '" + name + "' is not an integer");
            r.counts.add_signed(name, n.get<std::int64_t>());
        }
        return r;
    });
}

json plan_to_json(const MarkerPlan& plan) {
    json a = json::array();
    for (const auto& s : plan.assignments)
        a.push_back({{"slot", s.slot}, {"name", s.name}, {"line", s.line}, {"column", s.column}});
    return {{"file", plan.file},
            {"array_name", plan.array_name},
            {"array_size", plan.array_size},
            {"no_sites", plan.no_sites},
            {"assignments", a}};
}

MarkerPlan plan_from_json(const json& j) {
    return guarded("marker plan", [&] {
        MarkerPlan p;
        p.file = j.at("file").get<std::string>();
        p.array_name = j.at("array_name").get<std::string>();
        p.array_size = j.at("array_size").get<std::size_t>();
        p.no_sites = j.value("no_sites", false);
        for (const auto& s : j.at("assignments"))
            p.assignments.push_back({s.at("slot").get<std::size_t>(), s.at("name").get<std::string>(),
                                     s.at("line").get<std::size_t>(), s.at("column").get<std::size_t>()});
        return p;
    });
}

void for_each_jsonl(const std::string& path, const std::function<void(const json&)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            fn(json::parse(line));
        } catch (const json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

JsonlWriter::JsonlWriter(std::string path) : path_(std::move(path)), tmp_(path_ + ".tmp") {
    const std::filesystem::path p(path_);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    out_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!out_) throw DataError("cannot write '" + tmp_ + "'");
}

JsonlWriter::~JsonlWriter() {
    if (!committed_) {
        out_.close();
        std::error_code ec;
        std::filesystem::remove(tmp_, ec);
    }
}

void JsonlWriter::write(const json& j) {
    out_ << j.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
}

void JsonlWriter::commit() {
    out_.close();
    if (!out_) throw DataError("short write to '" + tmp_ + "'");
    std::filesystem::rename(tmp_, path_);
    committed_ = true;
}

} // namespace inlinerec
