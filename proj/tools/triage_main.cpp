// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 triage contributors

#include <csignal>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include <triage/corpus.hpp>
#include <triage/errors.hpp>
#include <triage/eval.hpp>
#include <triage/models.hpp>
#include <triage/monitor.hpp>
#include <triage/ocr.hpp>
#include <triage/service.hpp>
#include <triage/textprep.hpp>
#include <triage/util.hpp>
#include <triage/version.hpp>

namespace {

using namespace triage;

int g_log_level = 1;  // 0 = debug, 1 = info, 2 = warn, 3 = error

void log_at(int level, const std::string& tag, const std::string& message) {
    if (level < g_log_level) return;
    std::fprintf(stderr, "[%s] %s\n", tag.c_str(), message.c_str());
}

void log_info(const std::string& message) { log_at(1, "info", message); }

struct GlobalOptions {
    std::uint64_t seed = 1;
    int threads = 0;  // 0 = available parallelism
    std::string log_level = "info";

    int resolved_threads() const {
        if (threads > 0) return threads;
        const auto hw = static_cast<int>(std::thread::hardware_concurrency());
        return hw > 0 ? hw : 1;
    }
};

void log_run_header(const std::string& subcommand, const GlobalOptions& global) {
    std::ostringstream os;
    os << "triage " << kVersion << " " << subcommand << " (seed=" << global.seed
       << ", threads=" << global.resolved_threads() << ", formats: corpus=v" << kCorpusFormatVersion
       << " tfidf=v" << kTfIdfFormatVersion << " linear=v" << kLinearFormatVersion << " bundle=v"
       << kBundleFormatVersion << ")";
    log_info(os.str());
}

std::unique_ptr<OcrBackend> backend_or_null(const std::string& spec) {
    if (spec.empty()) return nullptr;
    return make_backend(spec);
}

/// Consulted only when an attachment has no inline text: without a
/// configured engine that is an error, not silence.
class NoBackend : public OcrBackend {
public:
    std::string id() const override { return "none"; }
    std::string extract_text(const Attachment& attachment,
                             const std::optional<std::string>&) override {
        throw BackendFailure("attachment '" + attachment.id +
                             "' needs OCR but no --backend was configured");
    }
};

std::map<std::string, std::string> gather_ocr_texts(const Dataset& dataset,
                                                    const std::string& backend_spec,
                                                    const std::string& cache_path, int threads) {
    auto backend = backend_or_null(backend_spec);
    NoBackend fallback;
    OcrBackend& engine = backend ? *backend : static_cast<OcrBackend&>(fallback);
    OcrCache cache = cache_path.empty() ? OcrCache() : OcrCache::open(cache_path);
    return extract_all(dataset, engine, cache, FailurePolicy::FailFast, threads);
}

ModelConfig model_config_from_flags(std::uint64_t seed, int ngram_max, int min_df,
                                    const std::string& stopword_path, double c, double tol,
                                    int max_iter, int threads) {
    ModelConfig config;
    config.prep.ngram_max = ngram_max;
    if (!stopword_path.empty()) config.prep.stopwords = load_stopwords(stopword_path);
    config.train.c = c;
    config.train.tol = tol;
    config.train.max_iter = max_iter;
    config.train.seed = seed;
    config.train.threads = threads;
    config.min_df = min_df;
    return config;
}

int run_corpus_validate(const std::string& path) {
    const auto issues = validate_file(path);
    if (issues.empty()) {
        const auto dataset = load(path);
        std::cout << "ok: " << dataset.reports.size() << " reports, " << dataset.class_list.size()
                  << " teams\n";
        return 0;
    }
    for (const auto& issue : issues)
        std::cerr << path << ":" << issue.line << ": " << issue.field << ": " << issue.message
                  << "\n";
    std::cerr << issues.size() << " problem(s) found\n";
    return 1;
}

int run_corpus_synth(const std::string& config_path, std::uint64_t seed, bool seed_given,
                     const std::string& out_path) {
    SynthConfig config;
    if (!config_path.empty())
        config = synth_config_from_json(nlohmann::json::parse(read_file(config_path)));
    if (seed_given) config.seed = seed;
    const auto dataset = generate(config);
    save(dataset, out_path);
    std::cout << "generated " << dataset.reports.size() << " reports (" << dataset.class_list.size()
              << " teams) -> " << out_path << "\n";
    return 0;
}

int run_ocr_warm(const std::string& corpus_path, const std::string& backend_spec,
                 const std::string& cache_path, int threads) {
    const auto dataset = load(corpus_path);
    auto backend = make_backend(backend_spec);
    auto cache = OcrCache::open(cache_path);
    const auto before = cache.size();
    const auto texts = extract_all(dataset, *backend, cache, FailurePolicy::FailFast, threads);
    std::size_t non_empty = 0;
    for (const auto& [id, text] : texts)
        if (!text.empty()) ++non_empty;
    std::cout << "warmed cache " << cache_path << ": " << cache.size() << " entries ("
              << (cache.size() - before) << " new), " << non_empty
              << " reports with screenshot text\n";
    return 0;
}

int run_train(const std::string& kind_name, const std::string& corpus_path,
              const std::string& out_dir, const std::string& backend_spec,
              const std::string& cache_path, const ModelConfig& config, int threads) {
    const auto kind = model_kind_from_string(kind_name);
    const auto dataset = filter_resolved(load(corpus_path));
    if (dataset.reports.empty()) throw EmptyCorpus("no resolved reports in " + corpus_path);
    const auto ocr_texts = gather_ocr_texts(dataset, backend_spec, cache_path, threads);
    const auto model = AssignmentModel::train(dataset, kind, config, ocr_texts);
    model.save(out_dir, dataset_fingerprint(dataset));
    std::cout << "trained " << kind_name << " on " << dataset.reports.size() << " reports ("
              << dataset.class_list.size() << " teams) -> " << out_dir << "\n";
    return 0;
}

int run_predict(const std::string& model_dir, const std::string& corpus_path,
                const std::string& out_path, const std::string& backend_spec,
                const std::string& cache_path, int top_k, int threads) {
    const auto model = AssignmentModel::load(model_dir);
    const auto dataset = load(corpus_path);
    const auto ocr_texts = gather_ocr_texts(dataset, backend_spec, cache_path, threads);

    std::ostringstream out;
    for (const auto& report : dataset.reports) {
        const auto it = ocr_texts.find(report.id);
        const auto result = model.assign(report, it == ocr_texts.end() ? "" : it->second, top_k);
        auto j = assignment_result_to_json(result, top_k);
        j["id"] = report.id;
        out << j.dump() << '\n';
    }
    write_file_atomic(out_path, out.str());
    std::cout << "wrote " << dataset.reports.size() << " predictions -> " << out_path << "\n";
    return 0;
}

int run_evaluate(const std::string& spec_path, const std::string& corpus_path,
                 const std::string& out_dir, const std::string& backend_spec,
                 const std::string& cache_path, int threads) {
    const auto spec = ExperimentSpec::from_json(nlohmann::json::parse(read_file(spec_path)));
    const auto dataset = filter_resolved(load(corpus_path));
    const auto ocr_texts = gather_ocr_texts(dataset, backend_spec, cache_path, threads);
    const auto result = run_experiment(dataset, spec, ocr_texts, threads);
    result.write(out_dir);
    std::cout << "evaluated " << spec.kinds.size() << " kind(s) x " << spec.repetitions
              << " repetition(s) -> " << out_dir << "\n";
    return 0;
}

int run_compare(const std::string& experiment_dir, const std::string& kind_a,
                const std::string& kind_b, const std::string& partition_name) {
    const auto result = ExperimentResult::read(experiment_dir);
    const auto a =
        result.accuracies(model_kind_from_string(kind_a), partition_from_string(partition_name));
    const auto b =
        result.accuracies(model_kind_from_string(kind_b), partition_from_string(partition_name));
    if (a.size() < 2 || b.size() < 2)
        throw TooFewSamples("experiment holds fewer than 2 repetitions for a compared kind");

    auto mean = [](const std::vector<double>& v) {
        double m = 0.0;
        for (const double x : v) m += x;
        return m / static_cast<double>(v.size());
    };
    const auto test = wilcoxon_rank_sum(a, b);
    std::cout << "partition: " << partition_name << "\n"
              << kind_a << ": mean accuracy " << mean(a) << " over " << a.size() << " repetitions\n"
              << kind_b << ": mean accuracy " << mean(b) << " over " << b.size() << " repetitions\n"
              << "wilcoxon rank-sum statistic: " << test.statistic << " ("
              << (test.exact ? "exact" : "approximate") << ")\n"
              << "p-value (two-sided): " << test.p_value << "\n"
              << "significant at 0.05: " << (test.p_value < 0.05 ? "yes" : "no") << "\n";
    return 0;
}

int run_monitor(const std::string& series_path, double penalty, bool penalty_given,
                double drop_threshold) {
    const auto series = AccuracySeries::load(series_path);
    RetrainConfig config;
    if (penalty_given) config.penalty = penalty;
    config.drop_threshold = drop_threshold;
    const auto decision = should_retrain(series, config);

    std::cout << "points: " << series.points.size() << "\n";
    std::cout << "penalty: " << config.penalty.value_or(default_penalty(series)) << "\n";
    std::cout << "change points:";
    for (const auto index : decision.change_points)
        std::cout << " " << format_date(series.points[index].date) << " (index " << index << ")";
    if (decision.change_points.empty()) std::cout << " none";
    std::cout << "\n";
    if (!decision.change_points.empty()) {
        std::cout << "previous segment mean: " << decision.previous_mean << "\n"
                  << "recent segment mean: " << decision.recent_mean << "\n";
    }
    std::cout << "retrain: " << (decision.retrain ? "yes" : "no") << "\n";
    return 0;
}

volatile std::sig_atomic_t g_reload_requested = 0;

int run_serve(const std::string& bundle_dir, const std::string& bind,
              const std::string& backend_spec) {
    std::string address = "127.0.0.1";
    int port = 8080;
    if (const auto colon = bind.rfind(':'); colon != std::string::npos) {
        address = bind.substr(0, colon);
        port = std::stoi(bind.substr(colon + 1));
    } else if (!bind.empty()) {
        address = bind;
    }

    std::shared_ptr<OcrBackend> backend;
    if (!backend_spec.empty()) backend = make_backend(backend_spec);

    AssignmentService service(bundle_dir, backend);
    std::signal(SIGHUP, [](int) { g_reload_requested = 1; });

    // watcher: SIGHUP swaps in a freshly loaded bundle; requests in flight
    // finish on the old one
    std::thread watcher([&service] {
        for (;;) {
            std::this_thread::sleep_for(std::chrono::milliseconds(200));
            if (g_reload_requested) {
                g_reload_requested = 0;
                try {
                    service.reload();
                    log_info("bundle reloaded");
                } catch (const std::exception& e) {
                    log_at(3, "error", std::string("reload failed, keeping old bundle: ") + e.what());
                }
            }
        }
    });
    watcher.detach();

    log_info("serving " + bundle_dir + " on " + address + ":" + std::to_string(port));
    service.serve(address, port);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-channel issue report triage"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    GlobalOptions global;
    app.add_option("--seed", global.seed, "global random seed")->capture_default_str();
    app.add_option("--threads", global.threads, "worker pool bound (0 = available parallelism)")
        ->capture_default_str();
    app.add_option("--log-level", global.log_level, "debug|info|warn|error")->capture_default_str();
    // precedence: flags > config file > defaults
    app.set_config("--config-file", "", "read option defaults from an INI/TOML file");

    // corpus
    auto* corpus_cmd = app.add_subcommand("corpus", "corpus utilities");
    corpus_cmd->require_subcommand(1);

    std::string validate_path;
    auto* validate_cmd = corpus_cmd->add_subcommand("validate", "check a corpus file");
    validate_cmd->add_option("path", validate_path, "corpus file")->required();

    std::string synth_config_path, synth_out;
    std::uint64_t synth_seed = 0;
    auto* synth_cmd = corpus_cmd->add_subcommand("synth", "generate a synthetic corpus");
    synth_cmd->add_option("--config", synth_config_path, "synth config JSON");
    auto* synth_seed_opt = synth_cmd->add_option("--seed", synth_seed, "generator seed");
    synth_cmd->add_option("--out", synth_out, "output corpus file")->required();

    // ocr warm
    auto* ocr_cmd = app.add_subcommand("ocr", "attachment text extraction");
    ocr_cmd->require_subcommand(1);
    std::string warm_corpus, warm_backend, warm_cache;
    auto* warm_cmd = ocr_cmd->add_subcommand("warm", "pre-extract screenshot text into a cache");
    warm_cmd->add_option("corpus", warm_corpus, "corpus file")->required();
    warm_cmd->add_option("--backend", warm_backend, "fixture:<map>|command:<template>|stub:<ms>")
        ->required();
    warm_cmd->add_option("--cache", warm_cache, "cache file")->required();

    // train
    std::string train_kind, train_corpus, train_out, train_backend, train_cache, train_stopwords;
    int train_ngram = 1, train_min_df = 1, train_max_iter = 1000;
    double train_c = 1.0, train_tol = 1e-4;
    auto* train_cmd = app.add_subcommand("train", "train an assignment model bundle");
    train_cmd->add_option("--kind", train_kind,
                          "text-only|attachment-only|merged-multi|two-channel-multi|hybrid")
        ->required();
    train_cmd->add_option("--corpus", train_corpus, "training corpus")->required();
    train_cmd->add_option("--out", train_out, "bundle directory")->required();
    train_cmd->add_option("--backend", train_backend, "OCR backend spec");
    train_cmd->add_option("--cache", train_cache, "OCR cache file");
    train_cmd->add_option("--ngram-max", train_ngram, "n-gram order (1..3)")->capture_default_str();
    train_cmd->add_option("--min-df", train_min_df, "minimum document frequency")
        ->capture_default_str();
    train_cmd->add_option("--stopwords", train_stopwords, "stopword list file");
    train_cmd->add_option("--c", train_c, "SVM regularization trade-off")->capture_default_str();
    train_cmd->add_option("--tol", train_tol, "solver stopping tolerance")->capture_default_str();
    train_cmd->add_option("--max-iter", train_max_iter, "solver pass cap")->capture_default_str();

    // predict
    std::string predict_model, predict_corpus, predict_out, predict_backend, predict_cache;
    int predict_top_k = 5;
    auto* predict_cmd = app.add_subcommand("predict", "batch assignment");
    predict_cmd->add_option("--model", predict_model, "bundle directory")->required();
    predict_cmd->add_option("--corpus", predict_corpus, "corpus file")->required();
    predict_cmd->add_option("--out", predict_out, "output JSONL")->required();
    predict_cmd->add_option("--backend", predict_backend, "OCR backend spec");
    predict_cmd->add_option("--cache", predict_cache, "OCR cache file");
    predict_cmd->add_option("--top-k", predict_top_k, "scores/explanations per report")
        ->capture_default_str();

    // evaluate
    std::string eval_spec, eval_corpus, eval_out, eval_backend, eval_cache;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "run a repeated-holdout experiment");
    evaluate_cmd->add_option("--spec", eval_spec, "experiment spec JSON")->required();
    evaluate_cmd->add_option("--corpus", eval_corpus, "corpus file")->required();
    evaluate_cmd->add_option("--out", eval_out, "output directory")->required();
    evaluate_cmd->add_option("--backend", eval_backend, "OCR backend spec");
    evaluate_cmd->add_option("--cache", eval_cache, "OCR cache file");

    // compare
    std::string cmp_dir, cmp_a, cmp_b, cmp_partition = "all";
    auto* compare_cmd = app.add_subcommand("compare", "Wilcoxon comparison of two kinds");
    compare_cmd->add_option("--experiment", cmp_dir, "evaluate output directory")->required();
    compare_cmd->add_option("--a", cmp_a, "first model kind")->required();
    compare_cmd->add_option("--b", cmp_b, "second model kind")->required();
    compare_cmd->add_option("--partition", cmp_partition, "with-screenshots|without-screenshots|all")
        ->capture_default_str();

    // monitor
    std::string monitor_series;
    double monitor_penalty = 0.0, monitor_drop = 0.02;
    auto* monitor_cmd = app.add_subcommand("monitor", "change-point check on an accuracy series");
    monitor_cmd->add_option("--series", monitor_series, "CSV series file (date,accuracy,n)")
        ->required();
    auto* penalty_opt = monitor_cmd->add_option("--penalty", monitor_penalty, "segmentation penalty");
    monitor_cmd
        ->add_option("--drop-threshold", monitor_drop, "accuracy drop that triggers retraining")
        ->capture_default_str();

    // serve
    std::string serve_bundle, serve_bind = "127.0.0.1:8080", serve_backend;
    auto* serve_cmd = app.add_subcommand("serve", "HTTP assignment service");
    serve_cmd->add_option("--bundle", serve_bundle, "bundle directory")->required();
    serve_cmd->add_option("--bind", serve_bind, "address:port")->capture_default_str();
    serve_cmd->add_option("--backend", serve_backend, "OCR backend spec for image payloads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (global.log_level == "debug") g_log_level = 0;
    else if (global.log_level == "warn") g_log_level = 2;
    else if (global.log_level == "error") g_log_level = 3;

    const int threads = global.resolved_threads();

    try {
        if (validate_cmd->parsed()) {
            log_run_header("corpus validate", global);
            return run_corpus_validate(validate_path);
        }
        if (synth_cmd->parsed()) {
            log_run_header("corpus synth", global);
            const bool cli_seed = synth_seed_opt->count() > 0;
            return run_corpus_synth(synth_config_path, cli_seed ? synth_seed : global.seed,
                                    cli_seed || app.count("--seed") > 0, synth_out);
        }
        if (warm_cmd->parsed()) {
            log_run_header("ocr warm", global);
            return run_ocr_warm(warm_corpus, warm_backend, warm_cache, threads);
        }
        if (train_cmd->parsed()) {
            log_run_header("train", global);
            const auto config = model_config_from_flags(global.seed, train_ngram, train_min_df,
                                                        train_stopwords, train_c, train_tol,
                                                        train_max_iter, threads);
            return run_train(train_kind, train_corpus, train_out, train_backend, train_cache,
                             config, threads);
        }
        if (predict_cmd->parsed()) {
            log_run_header("predict", global);
            return run_predict(predict_model, predict_corpus, predict_out, predict_backend,
                               predict_cache, predict_top_k, threads);
        }
        if (evaluate_cmd->parsed()) {
            log_run_header("evaluate", global);
            return run_evaluate(eval_spec, eval_corpus, eval_out, eval_backend, eval_cache, threads);
        }
        if (compare_cmd->parsed()) {
            log_run_header("compare", global);
            return run_compare(cmp_dir, cmp_a, cmp_b, cmp_partition);
        }
        if (monitor_cmd->parsed()) {
            log_run_header("monitor", global);
            return run_monitor(monitor_series, monitor_penalty, penalty_opt->count() > 0,
                               monitor_drop);
        }
        if (serve_cmd->parsed()) {
            log_run_header("serve", global);
            return run_serve(serve_bundle, serve_bind, serve_backend);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
