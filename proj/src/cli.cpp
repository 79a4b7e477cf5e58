#include "inlinerec/cli.hpp"

#include "inlinerec/classifier.hpp"
#include "inlinerec/coalesce.hpp"
#include "inlinerec/combine.hpp"
#include "inlinerec/eval.hpp"
#include "inlinerec/external.hpp"
#include "inlinerec/marker.hpp"
#include "inlinerec/records.hpp"
#include "inlinerec/text.hpp"
#include "inlinerec/tokenizer.hpp"
#include "inlinerec/windowing.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>

namespace inlinerec {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string file_digest(const std::string& path) {
    return "fnv1a64:" + hex64(fnv1a64(read_file(path)));
}

/// Collects what a stage read, wrote and was configured with, then appends
/// one line to <run-dir>/run_manifest.jsonl.
class Stage {
public:
    Stage(std::string command, std::vector<std::string> args, std::string run_dir)
        : command_(std::move(command)), args_(std::move(args)), run_dir_(std::move(run_dir)) {
        fs::create_directories(run_dir_);
    }

    std::string out_path(const std::string& override_path, const std::string& default_name) const {
        if (!override_path.empty()) return override_path;
        return (fs::path(run_dir_) / default_name).string();
    }

    void input(const std::string& path) { inputs_[path] = file_digest(path); }
    void output(const std::string& path) { outputs_.push_back(path); }
    void param(const std::string& key, json value) { params_[key] = std::move(value); }
    void seed(std::uint64_t s) { params_["seed"] = s; }

    void finish() const {
        json rec{{"command", command_},     {"args", args_},
                 {"parameters", params_},   {"inputs", inputs_},
                 {"outputs", outputs_},     {"tool_version", kToolVersion}};
        std::ofstream m(fs::path(run_dir_) / "run_manifest.jsonl", std::ios::app | std::ios::binary);
        m << rec.dump() << '\n';
    }

private:
    std::string command_;
    std::vector<std::string> args_;
    std::string run_dir_;
    json params_ = json::object();
    json inputs_ = json::object();
    std::vector<std::string> outputs_;
};

TargetFunctionSet load_targets(const std::string& path) {
    return TargetFunctionSet::parse(read_file(path));
}

std::vector<DecompiledFunction> load_functions(const std::string& path) {
    std::vector<DecompiledFunction> fns;
    for_each_jsonl(path, [&](const json& j) { fns.push_back(function_from_json(j)); });
    return fns;
}

std::vector<WindowInstance> load_windows(const std::string& path) {
    std::vector<WindowInstance> ws;
    for_each_jsonl(path, [&](const json& j) { ws.push_back(window_from_json(j)); });
    return ws;
}

std::map<std::string, Multiset> load_multisets(const std::string& path) {
    std::map<std::string, Multiset> out;
    for_each_jsonl(path, [&](const json& j) {
        auto r = multiset_from_json(j);
        if (!out.emplace(r.func_id, r.counts).second)
            throw DataError("duplicate multiset record for " + r.func_id);
    });
    return out;
}

// Function ids sort by (file, ordinal); anything unparsable falls back to text order.
bool id_less(const std::string& a, const std::string& b) {
    try {
        return FunctionId::parse(a) < FunctionId::parse(b);
    } catch (const DataError&) {
        return a < b;
    }
}

std::vector<std::string> sorted_ids(std::set<std::string> ids) {
    std::vector<std::string> v(ids.begin(), ids.end());
    std::stable_sort(v.begin(), v.end(), id_less);
    return v;
}

// Returns {residual truth, every surviving marker}; the latter scores combined output.
std::pair<Multiset, Multiset> label_truth(DecompiledFunction& fn, const TargetFunctionSet& targets, std::ostream& err) {
    const auto ex = extract_markers(fn);
    for (auto ln : ex.malformed_lines)
        err << "warning: " << fn.id.str() << ": malformed marker on body line " << ln << "\n";
    std::vector<RecoveredMarker> known;
    for (const auto& m : ex.markers) {
        if (targets.contains(m.name)) known.push_back(m);
        else err << "warning: " << fn.id.str() << ": marker for non-target '" << m.name << "' ignored\n";
    }
    auto rec = reconcile(known, fn.decompiler_recovered);
    fn.true_labels = rec.residual;
    return {fn.truth(), fn.truth() + rec.removed};
}

// --- subcommands ----------------------------------------------------------------

struct Common {
    std::string run_dir;
    std::string out;
};

int cmd_inject(Stage& st, const std::vector<std::string>& sources, const std::string& targets_path,
               std::size_t array_size, std::ostream& out, std::ostream& err) {
    const auto targets = load_targets(targets_path);
    st.input(targets_path);
    st.param("array_size", array_size);
    for (const auto& src : sources) {
        st.input(src);
        const auto file = SourceFile::from_content(src, read_file(src), Language::C);
        const auto res = inject_markers(file, targets, array_size);
        fs::path marked(src);
        marked.replace_extension(".marked.c");
        write_file_atomic(marked.string(), res.instrumented.content);
        const auto plan_path = st.out_path("", fs::path(src).stem().string() + ".plan.json");
        write_file_atomic(plan_path, plan_to_json(res.plan).dump(2) + "\n");
        st.output(marked.string());
        st.output(plan_path);
        if (res.plan.no_sites) err << "warning: " << src << ": no target calls found\n";
        out << src << ": " << res.plan.assignments.size() << " markers -> " << marked.string() << "\n";
    }
    return kExitOk;
}

int cmd_reconcile(Stage& st, const std::string& manifest_path, const std::string& root,
                  const std::string& functions_path, const std::string& targets_path, std::ostream& out,
                  std::ostream& err) {
    const auto targets = load_targets(targets_path);
    st.input(targets_path);

    std::vector<DecompiledFunction> fns;
    if (!manifest_path.empty()) {
        st.input(manifest_path);
        const auto entries = parse_manifest(read_file(manifest_path));
        const auto loaded = load_corpus(root.empty() ? fs::path(manifest_path).parent_path() : fs::path(root), entries);
        for (const auto& issue : loaded.issues) err << "warning: " << issue.path << ": " << issue.message << "\n";
        if (loaded.files.empty() && !loaded.issues.empty()) throw DataError("no manifest entry could be loaded");
        for (const auto& file : loaded.files) {
            if (file.language != Language::PseudoC) continue;
            for (auto& fn : split_functions(file)) {
                if (fn.truncated) err << "warning: " << fn.id.str() << ": unbalanced braces, body truncated at EOF\n";
                fn.decompiler_recovered = recovered_calls(fn, targets);
                fns.push_back(std::move(fn));
            }
        }
    } else if (!functions_path.empty()) {
        st.input(functions_path);
        fns = load_functions(functions_path);
    } else {
        throw UsageError("reconcile needs --manifest or --functions");
    }
    std::stable_sort(fns.begin(), fns.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

    JsonlWriter fw(st.out_path("", "functions.jsonl"));
    JsonlWriter tw(st.out_path("", "truth.jsonl"));
    JsonlWriter aw(st.out_path("", "truth_all.jsonl"));
    JsonlWriter dw(st.out_path("", "decompiler.jsonl"));
    std::size_t labels = 0;
    for (auto& fn : fns) {
        const auto [truth, all] = label_truth(fn, targets, err);
        labels += truth.total();
        fw.write(function_to_json(fn));
        tw.write(multiset_to_json({fn.id.str(), truth}));
        aw.write(multiset_to_json({fn.id.str(), all}));
        dw.write(multiset_to_json({fn.id.str(), fn.decompiler_recovered}));
    }
    for (auto* w : {&fw, &tw, &aw, &dw}) {
        w->commit();
        st.output(w->path());
    }
    out << fns.size() << " functions, " << labels << " residual labels\n";
    return kExitOk;
}

int cmd_bpe_train(Stage& st, const Common& c, const std::string& functions_path, std::size_t vocab_size,
                  std::uint64_t min_freq, std::ostream& out) {
    st.input(functions_path);
    st.param("vocab_size", vocab_size);
    st.param("min_frequency", min_freq);
    std::vector<std::string> corpus;
    for_each_jsonl(functions_path, [&](const json& j) {
        for (const auto& line : function_from_json(j).lines)
            if (!is_marker_line(line)) corpus.push_back(line);
    });
    const auto vocab = train_bpe(corpus, vocab_size, min_freq);
    const auto path = st.out_path(c.out, "vocab.txt");
    write_file_atomic(path, vocab.serialize());
    st.output(path);
    out << vocab.size() << " tokens, " << vocab.merges().size() << " merges -> " << path << "\n";
    return kExitOk;
}

int cmd_windows(Stage& st, const Common& c, const std::string& functions_path, WindowSpec spec,
                const std::string& mode, std::ostream& out) {
    if (mode == "centered") spec.mode = WindowSpec::Mode::Centered;
    else if (mode != "scan") throw UsageError("--mode must be scan or centered");
    spec.validate();
    st.input(functions_path);
    st.param("window_height", spec.height);
    st.param("stride", spec.stride);
    st.param("mode", mode);
    st.param("before", spec.before);
    st.param("after", spec.after);

    JsonlWriter w(st.out_path(c.out, "windows.jsonl"));
    std::size_t n = 0, labeled = 0;
    for_each_jsonl(functions_path, [&](const json& j) {
        const auto fn = function_from_json(j);
        std::vector<WindowInstance> ws;
        if (spec.mode == WindowSpec::Mode::Scan) {
            ws = scan_windows(fn, spec);
        } else {
            std::set<std::size_t> anchors;
            for (const auto& l : fn.true_labels) anchors.insert(l.anchor);
            for (auto a : anchors) ws.push_back(centered_context(fn, a, spec));
        }
        for (const auto& win : ws) {
            w.write(window_to_json(win));
            ++n;
            labeled += win.labeled();
        }
    });
    w.commit();
    st.output(w.path());
    out << n << " windows (" << labeled << " labeled) -> " << w.path() << "\n";
    return kExitOk;
}

int cmd_rebalance(Stage& st, const Common& c, const std::string& windows_path, double fraction, std::uint64_t seed,
                  std::ostream& out) {
    st.input(windows_path);
    st.param("discard_fraction", fraction);
    st.seed(seed);
    const auto kept = rebalance(load_windows(windows_path), fraction, seed);
    JsonlWriter w(st.out_path(c.out, "windows.rebalanced.jsonl"));
    for (const auto& win : kept) w.write(window_to_json(win));
    w.commit();
    st.output(w.path());
    out << kept.size() << " windows kept -> " << w.path() << "\n";
    return kExitOk;
}

int cmd_fit(Stage& st, const Common& c, const std::string& windows_path, const std::string& kind,
            const std::string& vocab_path, double alpha, const std::string& targets_path,
            const std::vector<std::string>& command, std::size_t batch, std::uint32_t timeout_ms, std::ostream& out) {
    st.param("kind", kind);
    if (kind != "external" && windows_path.empty()) throw UsageError(kind + " needs --windows");
    PredictorHandle handle;
    if (kind == "prior") {
        st.input(windows_path);
        handle = fit_prior(load_windows(windows_path));
    } else if (kind == "token_stats") {
        if (vocab_path.empty()) throw UsageError("token_stats needs --vocab");
        st.input(windows_path);
        st.input(vocab_path);
        st.param("alpha", alpha);
        std::vector<std::string> declared;
        if (!targets_path.empty()) {
            st.input(targets_path);
            declared = load_targets(targets_path).names();
        }
        handle = fit_token_stats(load_windows(windows_path), BpeVocab::parse(read_file(vocab_path)), alpha, declared);
    } else if (kind == "external") {
        if (command.empty()) throw UsageError("external needs --command");
        handle = ExternalModelConfig{command, batch, timeout_ms};
    } else {
        throw UsageError("--kind must be prior, token_stats or external");
    }
    const auto path = st.out_path(c.out, "model.json");
    write_file_atomic(path, to_json(handle).dump() + "\n");
    st.output(path);
    out << predictor_kind(handle) << " model -> " << path << "\n";
    return kExitOk;
}

int cmd_predict(Stage& st, const Common& c, const std::string& model_path, const std::string& windows_path,
                const std::string& vocab_path, const std::string& targets_path, std::uint64_t seed, std::ostream& out,
                std::ostream& err) {
    st.input(model_path);
    st.input(windows_path);
    const auto handle = predictor_from_json(json::parse(read_file(model_path), nullptr, false));
    const auto windows = load_windows(windows_path);
    std::optional<BpeVocab> vocab;
    if (!vocab_path.empty()) {
        st.input(vocab_path);
        vocab = BpeVocab::parse(read_file(vocab_path));
    }

    std::vector<std::optional<std::string>> labels(windows.size());
    int status = kExitOk;
    if (const auto* prior = std::get_if<PriorModel>(&handle)) {
        st.seed(seed);
        for (std::size_t i = 0; i < windows.size(); ++i) labels[i] = predict_prior(*prior, windows[i], seed, i);
    } else if (const auto* ts = std::get_if<TokenStatsModel>(&handle)) {
        if (!vocab) throw UsageError("token_stats prediction needs --vocab");
        if (vocab->size() != ts->vocab_size) throw DataError("vocab does not match the one the model was fit with");
        for (std::size_t i = 0; i < windows.size(); ++i) labels[i] = predict_token_stats(*ts, *vocab, windows[i]);
    } else {
        const auto& cfg = std::get<ExternalModelConfig>(handle);
        if (!vocab) throw UsageError("external prediction needs --vocab");
        if (targets_path.empty()) throw UsageError("external prediction needs --targets");
        st.input(targets_path);
        SubprocessChannel ch(cfg.command);
        ExternalOptions opts;
        opts.batch_size = cfg.batch_size;
        opts.timeout = std::chrono::milliseconds(cfg.timeout_ms);
        opts.warn = [&](std::string_view msg) { err << "warning: " << msg << "\n"; };
        auto res = predict_external(ch, windows, *vocab, load_targets(targets_path).names(), opts);
        for (const auto& e : res.errors)
            err << "error: windows " << e.first_window << ".." << e.first_window + e.count - 1 << ": " << e.message
                << "\n";
        if (!res.errors.empty()) status = kExitData;
        labels = std::move(res.labels);
    }

    JsonlWriter w(st.out_path(c.out, "predictions.jsonl"));
    std::size_t written = 0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (!labels[i]) continue;
        w.write(prediction_to_json({windows[i].func_id, windows[i].start, *labels[i]}));
        ++written;
    }
    w.commit();
    st.output(w.path());
    out << written << " predictions -> " << w.path() << "\n";
    return status;
}

int cmd_coalesce(Stage& st, const Common& c, const std::string& predictions_path, const CoalesceParams& params,
                 std::ostream& out) {
    params.validate();
    st.input(predictions_path);
    st.param("neighbor_span", params.neighbor_span);
    st.param("bridge_gap", params.bridge_gap);
    st.param("retain_threshold", params.retain_threshold);
    st.param("count_divisor", params.count_divisor);

    JsonlWriter w(st.out_path(c.out, "recovered.jsonl"));
    std::set<std::string> done;
    std::string current;
    std::vector<std::pair<std::size_t, std::string>> group;
    std::size_t functions = 0;
    auto flush = [&] {
        if (current.empty() && group.empty()) return;
        std::stable_sort(group.begin(), group.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<std::string> seq;
        for (auto& [_, l] : group) seq.push_back(std::move(l));
        const auto ms = coalesce(seq, params);
        w.write(multiset_to_json({current, ms}));
        out << current << " " << to_string(ms) << "\n";
        done.insert(current);
        group.clear();
        ++functions;
    };
    for_each_jsonl(predictions_path, [&](const json& j) {
        auto p = prediction_from_json(j);
        if (p.func_id != current) {
            flush();
            if (done.count(p.func_id))
                throw DataError("predictions for " + p.func_id + " are not contiguous");
            current = p.func_id;
        }
        group.emplace_back(p.start, std::move(p.label));
    });
    flush();
    w.commit();
    st.output(w.path());
    return kExitOk;
}

int cmd_combine(Stage& st, const Common& c, const std::string& model_path, const std::string& decompiler_path,
                std::ostream& out) {
    st.input(model_path);
    st.input(decompiler_path);
    const auto model = load_multisets(model_path);
    const auto dec = load_multisets(decompiler_path);
    std::set<std::string> ids;
    for (const auto& [id, _] : model) ids.insert(id);
    for (const auto& [id, _] : dec) ids.insert(id);
    JsonlWriter w(st.out_path(c.out, "combined.jsonl"));
    for (const auto& id : sorted_ids(ids)) {
        const auto m = model.count(id) ? model.at(id) : Multiset{};
        const auto d = dec.count(id) ? dec.at(id) : Multiset{};
        w.write(multiset_to_json({id, combine(m, d)}));
    }
    w.commit();
    st.output(w.path());
    out << ids.size() << " functions -> " << w.path() << "\n";
    return kExitOk;
}

int cmd_score(Stage& st, const Common& c, const std::string& pred_path, const std::string& truth_path,
              const std::string& manifest_path, const std::string& breakdown, std::ostream& out) {
    st.input(pred_path);
    st.input(truth_path);
    ReportOptions opts{false, false};
    for (const auto& key : split(breakdown, ',')) {
        const auto k = trim(key);
        if (k == "opt") opts.by_optimization = true;
        else if (k == "name") opts.by_name = true;
        else if (!k.empty()) throw UsageError("--breakdown keys are opt and name");
    }
    st.param("breakdown", breakdown);

    std::map<std::string, OptLevel> opt_of;
    if (!manifest_path.empty()) {
        st.input(manifest_path);
        for (const auto& e : parse_manifest(read_file(manifest_path))) opt_of[e.path] = e.optimization;
    }
    const auto pred = load_multisets(pred_path);
    const auto truth = load_multisets(truth_path);
    std::set<std::string> ids;
    for (const auto& [id, _] : pred) ids.insert(id);
    for (const auto& [id, _] : truth) ids.insert(id);

    std::vector<ScoredFunction> scored;
    for (const auto& id : sorted_ids(ids)) {
        OptLevel opt = OptLevel::Unknown;
        try {
            if (auto it = opt_of.find(FunctionId::parse(id).file); it != opt_of.end()) opt = it->second;
        } catch (const DataError&) {
        }
        scored.push_back(score(id, opt, pred.count(id) ? pred.at(id) : Multiset{},
                               truth.count(id) ? truth.at(id) : Multiset{}));
    }
    const auto report = aggregate(scored);
    const auto json_path = st.out_path(c.out, "report.json");
    const auto txt_path = fs::path(json_path).replace_extension(".txt").string();
    write_file_atomic(json_path, to_json(report).dump(2) + "\n");
    const auto table = format_table(report, opts);
    write_file_atomic(txt_path, table);
    st.output(json_path);
    st.output(txt_path);
    out << table;
    return kExitOk;
}

int cmd_correlate(Stage& st, const Common& c, const std::string& report_path, const std::string& targets_path,
                  std::ostream& out) {
    st.input(report_path);
    st.input(targets_path);
    const auto report = report_from_json(json::parse(read_file(report_path), nullptr, false));
    const auto targets = load_targets(targets_path);
    std::map<std::string, NameMetrics> per_name;
    for (const auto& [name, counts] : report.by_name) {
        if (!targets.contains(name)) continue;
        per_name[name] = {static_cast<double>(targets.frequency(name)), counts.precision(), counts.recall(),
                          counts.f1()};
    }
    if (per_name.size() < 2) throw DataError("correlation needs at least two scored target names");
    const auto r = frequency_correlation(per_name);
    auto as_json = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json j{{"names", r.names},
           {"r_precision", as_json(r.precision)},
           {"r_recall", as_json(r.recall)},
           {"r_f1", as_json(r.f1)}};
    const auto path = st.out_path(c.out, "correlation.json");
    write_file_atomic(path, j.dump(2) + "\n");
    st.output(path);
    auto show = [&](const char* what, const std::optional<double>& v) {
        out << what << ": ";
        if (v) out << *v;
        else out << "undefined (zero variance)";
        out << "\n";
    };
    show("r(frequency, precision)", r.precision);
    show("r(frequency, recall)", r.recall);
    show("r(frequency, f1)", r.f1);
    return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Recover inlined library-function invocations from decompiled pseudo-C"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    Common common;
    const char* env_dir = std::getenv(kRunDirEnv);
    common.run_dir = env_dir ? env_dir : ".";
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--run-dir", common.run_dir, "Directory for outputs and run_manifest.jsonl")
            ->capture_default_str();
        sub->add_option("--out", common.out, "Override the primary output path");
    };

    // inject
    std::vector<std::string> sources;
    std::string targets_path;
    std::size_t array_size = kDefaultMarkerArraySize;
    auto* inject = app.add_subcommand("inject", "Insert marker assignments before target calls in C sources");
    inject->add_option("--source", sources, "Original C file (repeatable)")->required();
    inject->add_option("--targets", targets_path, "Target function list")->required();
    inject->add_option("--array-size", array_size)->capture_default_str()->check(CLI::PositiveNumber);
    add_common(inject);

    // reconcile
    std::string manifest_path, root, functions_path;
    auto* recon = app.add_subcommand("reconcile", "Split decompiled files, extract markers, drop recovered ones");
    recon->add_option("--manifest", manifest_path, "Corpus manifest (role<TAB>opt<TAB>path)");
    recon->add_option("--root", root, "Corpus root (default: manifest directory)");
    recon->add_option("--functions", functions_path, "Existing function records instead of a manifest");
    recon->add_option("--targets", targets_path)->required();
    add_common(recon);

    // bpe-train
    std::size_t vocab_size = kDefaultVocabSize;
    std::uint64_t min_freq = kDefaultMinFrequency;
    auto* bpe = app.add_subcommand("bpe-train", "Train a byte-level BPE vocabulary on function bodies");
    bpe->add_option("--functions", functions_path)->required();
    bpe->add_option("--vocab-size", vocab_size)->capture_default_str();
    bpe->add_option("--min-frequency", min_freq)->capture_default_str();
    add_common(bpe);

    // windows
    WindowSpec spec;
    std::string mode = "scan";
    auto* win = app.add_subcommand("windows", "Slice function bodies into labeled windows");
    win->add_option("--functions", functions_path)->required();
    win->add_option("--window-height", spec.height)->capture_default_str();
    win->add_option("--stride", spec.stride)->capture_default_str();
    win->add_option("--mode", mode, "scan or centered")->capture_default_str();
    win->add_option("--before", spec.before, "Centered mode: lines before the anchor")->capture_default_str();
    win->add_option("--after", spec.after, "Centered mode: lines after the anchor")->capture_default_str();
    add_common(win);

    // rebalance
    std::string windows_path;
    double fraction = 0.65;
    std::uint64_t seed = 0;
    auto* reb = app.add_subcommand("rebalance", "Discard a fraction of unlabeled windows");
    reb->add_option("--windows", windows_path)->required();
    reb->add_option("--discard-fraction", fraction)->check(CLI::Range(0.0, 1.0))->capture_default_str();
    reb->add_option("--seed", seed)->capture_default_str();
    add_common(reb);

    // fit
    std::string kind = "token_stats", vocab_path;
    double alpha = 1.0;
    std::vector<std::string> command;
    std::size_t batch = 32;
    std::uint32_t timeout_ms = 30000;
    auto* fit = app.add_subcommand("fit", "Fit a window classifier");
    fit->add_option("--windows", windows_path);
    fit->add_option("--kind", kind, "prior, token_stats or external")->capture_default_str();
    fit->add_option("--vocab", vocab_path);
    fit->add_option("--alpha", alpha, "Additive smoothing")->capture_default_str();
    fit->add_option("--targets", targets_path, "Declared label set");
    fit->add_option("--command", command, "External model server argv")->expected(1, -1);
    fit->add_option("--batch-size", batch)->capture_default_str();
    fit->add_option("--timeout-ms", timeout_ms)->capture_default_str();
    add_common(fit);

    // predict
    std::string model_path;
    auto* pred = app.add_subcommand("predict", "Label every window with a fitted model");
    pred->add_option("--model", model_path)->required();
    pred->add_option("--windows", windows_path)->required();
    pred->add_option("--vocab", vocab_path);
    pred->add_option("--targets", targets_path, "Known labels (external models)");
    pred->add_option("--seed", seed)->capture_default_str();
    add_common(pred);

    // coalesce
    std::string predictions_path;
    CoalesceParams params;
    auto* coal = app.add_subcommand("coalesce", "Turn per-window predictions into per-function multisets");
    coal->add_option("--predictions", predictions_path)->required();
    coal->add_option("--neighbor-span", params.neighbor_span)->capture_default_str();
    coal->add_option("--bridge-gap", params.bridge_gap)->capture_default_str();
    coal->add_option("--retain-threshold", params.retain_threshold)->capture_default_str();
    coal->add_option("--count-divisor", params.count_divisor)->capture_default_str();
    add_common(coal);

    // combine
    std::string model_ms, decompiler_ms;
    auto* comb = app.add_subcommand("combine", "Add decompiler recoveries to model recoveries");
    comb->add_option("--model", model_ms)->required();
    comb->add_option("--decompiler", decompiler_ms)->required();
    add_common(comb);

    // score
    std::string pred_ms, truth_ms, breakdown = "opt";
    auto* sc = app.add_subcommand("score", "Score recovered multisets against ground truth");
    sc->add_option("--pred", pred_ms)->required();
    sc->add_option("--truth", truth_ms)->required();
    sc->add_option("--manifest", manifest_path, "Corpus manifest giving each file's optimization level");
    sc->add_option("--breakdown", breakdown, "Comma list of opt,name")->capture_default_str();
    add_common(sc);

    // correlate
    std::string report_path;
    auto* corr = app.add_subcommand("correlate", "Pearson correlation of training frequency with per-name metrics");
    corr->add_option("--report", report_path)->required();
    corr->add_option("--targets", targets_path, "Targets with frequencies (name<TAB>count)")->required();
    add_common(corr);

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    CLI::App* sub = app.get_subcommands().front();
    std::vector<std::string> stage_args(args.begin() + 1, args.end());
    try {
        Stage st(sub->get_name(), stage_args, common.run_dir);
        int rc = kExitOk;
        if (sub == inject) rc = cmd_inject(st, sources, targets_path, array_size, out, err);
        else if (sub == recon) rc = cmd_reconcile(st, manifest_path, root, functions_path, targets_path, out, err);
        else if (sub == bpe) rc = cmd_bpe_train(st, common, functions_path, vocab_size, min_freq, out);
        else if (sub == win) rc = cmd_windows(st, common, functions_path, spec, mode, out);
        else if (sub == reb) rc = cmd_rebalance(st, common, windows_path, fraction, seed, out);
        else if (sub == fit)
            rc = cmd_fit(st, common, windows_path, kind, vocab_path, alpha, targets_path, command, batch, timeout_ms, out);
        else if (sub == pred)
            rc = cmd_predict(st, common, model_path, windows_path, vocab_path, targets_path, seed, out, err);
        else if (sub == coal) rc = cmd_coalesce(st, common, predictions_path, params, out);
        else if (sub == comb) rc = cmd_combine(st, common, model_ms, decompiler_ms, out);
        else if (sub == sc) rc = cmd_score(st, common, pred_ms, truth_ms, manifest_path, breakdown, out);
        else if (sub == corr) rc = cmd_correlate(st, common, report_path, targets_path, out);
        st.finish();
        return rc;
    } catch (const UsageError& e) {
        err << sub->get_name() << ": " << e.what() << "\n" << sub->help();
        return kExitUsage;
    } catch (const DataError& e) {
        err << sub->get_name() << ": " << e.what() << "\n";
        return kExitData;
    } catch (const std::filesystem::filesystem_error& e) {
        err << sub->get_name() << ": " << e.what() << "\n";
        return kExitData;
    }
}

} // namespace inlinerec
