// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 triage contributors

#include "triage/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "triage/errors.hpp"
#include "triage/rng.hpp"
#include "triage/util.hpp"

namespace triage {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::string to_string(PartitionTag tag) {
    switch (tag) {
        case PartitionTag::WithScreenshots: return "with-screenshots";
        case PartitionTag::WithoutScreenshots: return "without-screenshots";
        case PartitionTag::All: return "all";
    }
    return "unknown";
}

PartitionTag partition_from_string(const std::string& name) {
    if (name == "with-screenshots") return PartitionTag::WithScreenshots;
    if (name == "without-screenshots") return PartitionTag::WithoutScreenshots;
    if (name == "all") return PartitionTag::All;
    throw InvalidConfig("unknown partition '" + name + "'");
}

std::int64_t EvalReport::trace() const {
    std::int64_t t = 0;
    for (std::size_t i = 0; i < confusion.size(); ++i) t += confusion[i][i];
    return t;
}

EvalReport score(const std::vector<std::string>& predictions, const std::vector<std::string>& truths,
                 const std::vector<std::string>& class_list, PartitionTag tag) {
    if (predictions.size() != truths.size())
        throw LengthMismatch("predictions and truths must have equal length");
    if (predictions.empty()) throw EmptyInput("cannot score an empty prediction list");

    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < class_list.size(); ++i) index.emplace(class_list[i], i);

    EvalReport report;
    report.partition = tag;
    report.n = static_cast<std::int64_t>(predictions.size());
    report.confusion.assign(class_list.size(), std::vector<std::int64_t>(class_list.size(), 0));

    for (std::size_t i = 0; i < predictions.size(); ++i) {
        auto t = index.find(truths[i]);
        auto p = index.find(predictions[i]);
        if (t == index.end()) throw Error("truth label '" + truths[i] + "' not in class list");
        if (p == index.end()) throw Error("predicted label '" + predictions[i] + "' not in class list");
        ++report.confusion[t->second][p->second];
    }

    report.accuracy = static_cast<double>(report.trace()) / static_cast<double>(report.n);

    const std::size_t k = class_list.size();
    report.per_class.resize(k);
    double wp = 0.0, wr = 0.0, wf = 0.0;
    std::int64_t total_support = 0;
    for (std::size_t c = 0; c < k; ++c) {
        std::int64_t support = 0, predicted = 0;
        for (std::size_t j = 0; j < k; ++j) {
            support += report.confusion[c][j];
            predicted += report.confusion[j][c];
        }
        const auto tp = static_cast<double>(report.confusion[c][c]);
        ClassMetrics& m = report.per_class[c];
        m.support = support;
        m.precision = predicted > 0 ? tp / static_cast<double>(predicted) : 0.0;
        m.recall = support > 0 ? tp / static_cast<double>(support) : 0.0;
        m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                                              : 0.0;
        wp += static_cast<double>(support) * m.precision;
        wr += static_cast<double>(support) * m.recall;
        wf += static_cast<double>(support) * m.f1;
        total_support += support;
    }
    report.weighted_precision = wp / static_cast<double>(total_support);
    report.weighted_recall = wr / static_cast<double>(total_support);
    report.weighted_f1 = wf / static_cast<double>(total_support);
    return report;
}

namespace {

/// Average-tie ranks of the combined sample, doubled so they stay integral.
std::vector<std::int64_t> doubled_ranks(const std::vector<double>& combined) {
    const std::size_t n = combined.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return combined[a] < combined[b]; });

    std::vector<std::int64_t> r2(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && combined[order[j + 1]] == combined[order[i]]) ++j;
        // ranks i+1 .. j+1 share the average (i + j + 2) / 2; doubled: i + j + 2
        const std::int64_t doubled = static_cast<std::int64_t>(i + j + 2);
        for (std::size_t t = i; t <= j; ++t) r2[order[t]] = doubled;
        i = j + 1;
    }
    return r2;
}

bool has_ties(const std::vector<double>& combined) {
    std::vector<double> sorted = combined;
    std::sort(sorted.begin(), sorted.end());
    return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

double exact_p_value(const std::vector<std::int64_t>& r2, std::size_t n_a, std::int64_t w2) {
    // Counts subsets of size n_a by doubled-rank sum: a 0/1-knapsack dynamic
    // program equivalent to enumerating all C(n, n_a) assignments.
    const std::size_t n = r2.size();
    std::int64_t total = 0;
    for (auto r : r2) total += r;

    std::vector<std::vector<std::uint64_t>> count(
        n_a + 1, std::vector<std::uint64_t>(static_cast<std::size_t>(total) + 1, 0));
    count[0][0] = 1;
    for (std::size_t item = 0; item < n; ++item) {
        const auto r = static_cast<std::size_t>(r2[item]);
        const std::size_t k_hi = std::min(n_a, item + 1);
        for (std::size_t k = k_hi; k >= 1; --k) {
            auto& row = count[k];
            const auto& prev = count[k - 1];
            for (std::size_t s = static_cast<std::size_t>(total); s >= r; --s) row[s] += prev[s - r];
        }
    }

    std::uint64_t below_eq = 0, above_eq = 0, all = 0;
    for (std::size_t s = 0; s <= static_cast<std::size_t>(total); ++s) {
        const std::uint64_t c = count[n_a][s];
        all += c;
        if (static_cast<std::int64_t>(s) <= w2) below_eq += c;
        if (static_cast<std::int64_t>(s) >= w2) above_eq += c;
    }
    const double tail = static_cast<double>(std::min(below_eq, above_eq)) / static_cast<double>(all);
    return std::min(1.0, 2.0 * tail);
}

double approximate_p_value(const std::vector<double>& combined, const std::vector<std::int64_t>& r2,
                           std::size_t n_a, double w) {
    const auto n = static_cast<double>(combined.size());
    const auto na = static_cast<double>(n_a);
    const double nb = n - na;
    const double mean_w = na * (n + 1.0) / 2.0;

    // tie correction: sum of t^3 - t over tie groups
    std::vector<double> sorted = combined;
    std::sort(sorted.begin(), sorted.end());
    double tie_sum = 0.0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        const auto t = static_cast<double>(j - i + 1);
        tie_sum += t * t * t - t;
        i = j + 1;
    }
    (void)r2;

    const double variance = na * nb / 12.0 * ((n + 1.0) - tie_sum / (n * (n - 1.0)));
    if (variance <= 0.0) return 1.0;
    double z = 0.0;
    if (w > mean_w) {
        z = (w - 0.5 - mean_w) / std::sqrt(variance);
    } else if (w < mean_w) {
        z = (w + 0.5 - mean_w) / std::sqrt(variance);
    }
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

}  // namespace

WilcoxonResult wilcoxon_rank_sum(const std::vector<double>& a, const std::vector<double>& b,
                                 WilcoxonMethod method) {
    if (a.size() < 2 || b.size() < 2) throw TooFewSamples();

    std::vector<double> combined = a;
    combined.insert(combined.end(), b.begin(), b.end());
    const auto r2 = doubled_ranks(combined);

    std::int64_t w2 = 0;
    for (std::size_t i = 0; i < a.size(); ++i) w2 += r2[i];

    WilcoxonResult result;
    result.statistic = static_cast<double>(w2) / 2.0;

    bool use_exact = false;
    switch (method) {
        case WilcoxonMethod::Exact: use_exact = true; break;
        case WilcoxonMethod::Approximate: use_exact = false; break;
        case WilcoxonMethod::Auto:
            // Enumeration over the observed rank multiset stays exact under
            // ties, so the small-sample path does not require tie-free data.
            use_exact = combined.size() <= 20;
            break;
    }
    (void)has_ties;

    if (use_exact) {
        result.exact = true;
        result.p_value = exact_p_value(r2, a.size(), w2);
    } else {
        result.exact = false;
        result.p_value = approximate_p_value(combined, r2, a.size(), result.statistic);
    }
    return result;
}

// --- experiment runner ---

nlohmann::json ExperimentSpec::to_json() const {
    nlohmann::json kinds_json = nlohmann::json::array();
    for (const auto kind : kinds) kinds_json.push_back(triage::to_string(kind));
    nlohmann::json j{{"kinds", kinds_json},
                     {"repetitions", repetitions},
                     {"train_fraction", train_fraction},
                     {"seed", seed},
                     {"mode", mode == Mode::RandomHoldout ? "random-holdout" : "fixed-window"},
                     {"model",
                      {{"prep",
                        {{"ngram_max", model.prep.ngram_max},
                         {"min_token_len", model.prep.min_token_len},
                         {"stopwords", std::vector<std::string>(model.prep.stopwords.begin(),
                                                                model.prep.stopwords.end())}}},
                       {"train",
                        {{"c", model.train.c},
                         {"tol", model.train.tol},
                         {"max_iter", model.train.max_iter},
                         {"seed", model.train.seed},
                         {"fit_bias", model.train.fit_bias},
                         {"bias_scale", model.train.bias_scale}}},
                       {"min_df", model.min_df}}}};
    if (mode == Mode::FixedWindow) {
        j["window_start"] = format_rfc3339(window_start);
        j["window_end"] = format_rfc3339(window_end);
    }
    return j;
}

ExperimentSpec ExperimentSpec::from_json(const nlohmann::json& j) {
    ExperimentSpec spec;
    for (const auto& name : j.at("kinds")) spec.kinds.push_back(model_kind_from_string(name));
    spec.repetitions = j.value("repetitions", 30);
    spec.train_fraction = j.value("train_fraction", 0.8);
    spec.seed = j.value("seed", std::uint64_t{1});
    const std::string mode = j.value("mode", "random-holdout");
    if (mode == "random-holdout") {
        spec.mode = Mode::RandomHoldout;
    } else if (mode == "fixed-window") {
        spec.mode = Mode::FixedWindow;
        const auto start = parse_rfc3339(j.at("window_start").get<std::string>());
        const auto end = parse_rfc3339(j.at("window_end").get<std::string>());
        if (!start || !end || *start >= *end)
            throw InvalidConfig("fixed-window mode needs valid window_start < window_end");
        spec.window_start = *start;
        spec.window_end = *end;
    } else {
        throw InvalidConfig("unknown experiment mode '" + mode + "'");
    }
    if (j.contains("model")) {
        const auto& mj = j.at("model");
        if (mj.contains("prep")) {
            const auto& pj = mj.at("prep");
            spec.model.prep.ngram_max = pj.value("ngram_max", 1);
            spec.model.prep.min_token_len = pj.value("min_token_len", 1);
            if (pj.contains("stopwords")) {
                const auto words = pj.at("stopwords").get<std::vector<std::string>>();
                spec.model.prep.stopwords.insert(words.begin(), words.end());
            }
        }
        if (mj.contains("train")) {
            const auto& tj = mj.at("train");
            spec.model.train.c = tj.value("c", 1.0);
            spec.model.train.tol = tj.value("tol", 1e-4);
            spec.model.train.max_iter = tj.value("max_iter", 1000);
            spec.model.train.seed = tj.value("seed", std::uint64_t{0});
            spec.model.train.fit_bias = tj.value("fit_bias", true);
            spec.model.train.bias_scale = tj.value("bias_scale", 1.0);
        }
        spec.model.min_df = mj.value("min_df", 1);
    }
    if (spec.repetitions < 1) throw InvalidConfig("repetitions must be >= 1");
    return spec;
}

namespace {

std::uint64_t split_fingerprint(const Dataset& train, const Dataset& test) {
    std::uint64_t h = fnv1a64("split-v1");
    for (const auto& r : train.reports) h = fnv1a64(r.id, h);
    h = fnv1a64("||", h);
    for (const auto& r : test.reports) h = fnv1a64(r.id, h);
    return h;
}

std::pair<Dataset, Dataset> make_split(const Dataset& dataset, const ExperimentSpec& spec,
                                       std::uint64_t rep_seed) {
    if (spec.mode == ExperimentSpec::Mode::RandomHoldout)
        return random_split(dataset, spec.train_fraction, rep_seed);

    // Fixed test window, training set resampled (without replacement) from
    // the pool of earlier reports so train:test = f : 1-f.
    std::vector<IssueReport> test_reports, pool;
    for (const auto& report : dataset.reports) {
        if (report.created_at >= spec.window_start && report.created_at < spec.window_end) {
            test_reports.push_back(report);
        } else if (report.created_at < spec.window_start) {
            pool.push_back(report);
        }
    }
    if (test_reports.empty()) throw EmptySide("test");
    if (pool.empty()) throw EmptySide("train");

    const double ratio = spec.train_fraction / (1.0 - spec.train_fraction);
    auto target = static_cast<std::size_t>(
        std::floor(static_cast<double>(test_reports.size()) * ratio + 0.5));
    target = std::min(target, pool.size());
    if (target == 0) throw EmptySide("train");

    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(rep_seed);
    rng.shuffle(order);
    std::vector<bool> chosen(pool.size(), false);
    for (std::size_t i = 0; i < target; ++i) chosen[order[i]] = true;

    std::vector<IssueReport> train_reports;
    train_reports.reserve(target);
    for (std::size_t i = 0; i < pool.size(); ++i)
        if (chosen[i]) train_reports.push_back(pool[i]);

    return {Dataset::from_reports(std::move(train_reports)),
            Dataset::from_reports(std::move(test_reports))};
}

}  // namespace

ExperimentResult run_experiment(const Dataset& dataset, const ExperimentSpec& spec,
                                const std::map<std::string, std::string>& ocr_texts, int threads) {
    for (const auto& report : dataset.reports) {
        if (report.status != Status::Resolved)
            throw Error("run_experiment requires a resolved-only dataset; apply filter_resolved first");
    }
    if (spec.kinds.empty()) throw InvalidConfig("experiment needs at least one model kind");
    if (spec.repetitions < 1) throw InvalidConfig("repetitions must be >= 1");

    ExperimentResult result;
    result.spec = spec;
    result.class_list = dataset.class_list;
    result.rows.resize(static_cast<std::size_t>(spec.repetitions));

    const auto ocr_text_of = [&](const std::string& id) -> const std::string& {
        static const std::string kEmpty;
        auto it = ocr_texts.find(id);
        return it == ocr_texts.end() ? kEmpty : it->second;
    };

    auto run_repetition = [&](int rep, int inner_threads) {
        const std::uint64_t rep_seed = mix_seed(spec.seed, static_cast<std::uint64_t>(rep));
        auto [train_set, test_set] = make_split(dataset, spec, rep_seed);

        RepetitionRow row;
        row.repetition = rep;
        row.split_fingerprint = split_fingerprint(train_set, test_set);

        std::vector<std::size_t> ws_indices, wo_indices;
        for (std::size_t i = 0; i < test_set.reports.size(); ++i)
            (test_set.reports[i].has_screenshot() ? ws_indices : wo_indices).push_back(i);

        ModelConfig cfg = spec.model;
        cfg.train.threads = inner_threads;

        for (const auto kind : spec.kinds) {
            const auto model = AssignmentModel::train(train_set, kind, cfg, ocr_texts);

            std::vector<std::string> predictions;
            predictions.reserve(test_set.reports.size());
            for (const auto& report : test_set.reports)
                predictions.push_back(model.assign(report, ocr_text_of(report.id), 0).team);

            auto score_subset = [&](const std::vector<std::size_t>& indices, PartitionTag tag)
                -> std::optional<EvalReport> {
                if (indices.empty()) return std::nullopt;  // empty partition: flagged by absence
                std::vector<std::string> preds, truths;
                preds.reserve(indices.size());
                truths.reserve(indices.size());
                for (const auto i : indices) {
                    preds.push_back(predictions[i]);
                    truths.push_back(test_set.reports[i].assignee);
                }
                return score(preds, truths, dataset.class_list, tag);
            };

            auto& slot = row.results[kind];
            slot[static_cast<std::size_t>(PartitionTag::WithScreenshots)] =
                score_subset(ws_indices, PartitionTag::WithScreenshots);
            slot[static_cast<std::size_t>(PartitionTag::WithoutScreenshots)] =
                score_subset(wo_indices, PartitionTag::WithoutScreenshots);
            std::vector<std::size_t> all_indices(test_set.reports.size());
            std::iota(all_indices.begin(), all_indices.end(), 0);
            slot[static_cast<std::size_t>(PartitionTag::All)] =
                score_subset(all_indices, PartitionTag::All);
        }
        result.rows[static_cast<std::size_t>(rep)] = std::move(row);
    };

    const int workers = std::max(1, std::min(threads, spec.repetitions));
    if (workers == 1) {
        for (int rep = 0; rep < spec.repetitions; ++rep) run_repetition(rep, spec.model.train.threads);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t) {
            pool.emplace_back([&] {
                for (;;) {
                    const int rep = next.fetch_add(1);
                    if (rep >= spec.repetitions) return;
                    run_repetition(rep, 1);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    return result;
}

std::vector<double> ExperimentResult::accuracies(ModelKind kind, PartitionTag tag) const {
    std::vector<double> values;
    for (const auto& row : rows) {
        auto it = row.results.find(kind);
        if (it == row.results.end()) continue;
        const auto& report = it->second[static_cast<std::size_t>(tag)];
        if (report) values.push_back(report->accuracy);
    }
    return values;
}

std::vector<double> ExperimentResult::weighted_f1s(ModelKind kind, PartitionTag tag) const {
    std::vector<double> values;
    for (const auto& row : rows) {
        auto it = row.results.find(kind);
        if (it == row.results.end()) continue;
        const auto& report = it->second[static_cast<std::size_t>(tag)];
        if (report) values.push_back(report->weighted_f1);
    }
    return values;
}

namespace {

nlohmann::json stat_block(const std::vector<double>& values) {
    if (values.empty()) return nullptr;
    double mean = 0.0;
    for (const double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (const double v : values) var += (v - mean) * (v - mean);
    var = values.size() > 1 ? var / static_cast<double>(values.size() - 1) : 0.0;
    return nlohmann::json{{"mean", mean},
                          {"std", std::sqrt(var)},
                          {"max", *std::max_element(values.begin(), values.end())},
                          {"min", *std::min_element(values.begin(), values.end())},
                          {"n", values.size()}};
}

}  // namespace

nlohmann::json ExperimentResult::summary() const {
    nlohmann::json out;
    for (const auto kind : spec.kinds) {
        nlohmann::json per_kind;
        for (const auto tag :
             {PartitionTag::WithoutScreenshots, PartitionTag::WithScreenshots, PartitionTag::All}) {
            per_kind[triage::to_string(tag)] = {{"accuracy", stat_block(accuracies(kind, tag))},
                                                {"weighted_f1", stat_block(weighted_f1s(kind, tag))}};
        }
        out[triage::to_string(kind)] = std::move(per_kind);
    }
    return out;
}

void ExperimentResult::write(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    write_file_atomic(dir / "spec.json", spec.to_json().dump(2) + "\n");

    std::ostringstream rows_out;
    for (const auto& row : rows) {
        nlohmann::json results;
        for (const auto& [kind, partitions] : row.results) {
            nlohmann::json per_kind;
            for (const auto tag :
                 {PartitionTag::WithScreenshots, PartitionTag::WithoutScreenshots, PartitionTag::All}) {
                const auto& report = partitions[static_cast<std::size_t>(tag)];
                if (!report) {
                    per_kind[triage::to_string(tag)] = nullptr;  // empty partition
                    continue;
                }
                per_kind[triage::to_string(tag)] = {{"n", report->n},
                                                    {"accuracy", report->accuracy},
                                                    {"weighted_precision", report->weighted_precision},
                                                    {"weighted_recall", report->weighted_recall},
                                                    {"weighted_f1", report->weighted_f1}};
            }
            results[triage::to_string(kind)] = std::move(per_kind);
        }
        rows_out << nlohmann::json{{"repetition", row.repetition},
                                   {"split_fingerprint", to_hex(row.split_fingerprint)},
                                   {"results", results}}
                        .dump()
                 << '\n';
    }
    write_file_atomic(dir / "repetitions.jsonl", rows_out.str());

    write_file_atomic(dir / "summary.json", summary().dump(2) + "\n");

    // Human-readable block; records the resampling scheme for audit.
    std::ostringstream txt;
    txt << "experiment: " << (spec.mode == ExperimentSpec::Mode::RandomHoldout
                                  ? "random holdout"
                                  : "fixed test window, training set resampled without replacement "
                                    "from earlier reports until train:test = " +
                                        std::to_string(spec.train_fraction) + ":" +
                                        std::to_string(1.0 - spec.train_fraction))
        << "\n";
    txt << "repetitions: " << spec.repetitions << ", train_fraction: " << spec.train_fraction
        << ", seed: " << spec.seed << "\n\n";
    const auto summary_json = summary();
    for (const auto& [kind, partitions] : summary_json.items()) {
        for (const auto& [partition, metrics] : partitions.items()) {
            const auto& acc = metrics.at("accuracy");
            if (acc.is_null()) {
                txt << kind << " / " << partition << ": (empty partition)\n";
                continue;
            }
            txt << kind << " / " << partition << ": accuracy mean=" << acc.at("mean").get<double>()
                << " std=" << acc.at("std").get<double>() << " min=" << acc.at("min").get<double>()
                << " max=" << acc.at("max").get<double>() << "\n";
        }
    }
    write_file_atomic(dir / "summary.txt", txt.str());
}

ExperimentResult ExperimentResult::read(const std::filesystem::path& dir) {
    ExperimentResult result;
    result.spec = ExperimentSpec::from_json(nlohmann::json::parse(read_file(dir / "spec.json")));

    std::istringstream rows_in(read_file(dir / "repetitions.jsonl"));
    std::string line;
    while (std::getline(rows_in, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        RepetitionRow row;
        row.repetition = j.at("repetition").get<int>();
        row.split_fingerprint = std::stoull(j.at("split_fingerprint").get<std::string>(), nullptr, 16);
        for (const auto& [kind_name, partitions] : j.at("results").items()) {
            const auto kind = model_kind_from_string(kind_name);
            auto& slot = row.results[kind];
            for (const auto& [partition_name, metrics] : partitions.items()) {
                const auto tag = partition_from_string(partition_name);
                if (metrics.is_null()) continue;
                EvalReport report;
                report.partition = tag;
                report.n = metrics.at("n").get<std::int64_t>();
                report.accuracy = metrics.at("accuracy").get<double>();
                report.weighted_precision = metrics.at("weighted_precision").get<double>();
                report.weighted_recall = metrics.at("weighted_recall").get<double>();
                report.weighted_f1 = metrics.at("weighted_f1").get<double>();
                slot[static_cast<std::size_t>(tag)] = std::move(report);
            }
        }
        result.rows.push_back(std::move(row));
    }
    return result;
}

// --- timing harness ---

TimingSummary summarize_timings(std::vector<double> samples) {
    if (samples.empty()) throw EmptyInput("no timing samples");
    TimingSummary s;
    double mean = 0.0;
    for (const double v : samples) mean += v;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (const double v : samples) var += (v - mean) * (v - mean);
    var = samples.size() > 1 ? var / static_cast<double>(samples.size() - 1) : 0.0;
    std::sort(samples.begin(), samples.end());
    s.mean = mean;
    s.stddev = std::sqrt(var);
    s.min = samples.front();
    s.max = samples.back();
    const std::size_t mid = samples.size() / 2;
    s.median = samples.size() % 2 == 1 ? samples[mid] : 0.5 * (samples[mid - 1] + samples[mid]);
    return s;
}

TimingSummary TimingReport::stats(const std::string& metric) const {
    auto it = samples.find(metric);
    if (it == samples.end()) throw Error("no samples recorded for metric '" + metric + "'");
    return summarize_timings(it->second);
}

namespace {

bool consumes_attachments(ModelKind kind, const IssueReport& report) {
    switch (kind) {
        case ModelKind::TextOnly: return false;
        case ModelKind::AttachmentOnly:
        case ModelKind::MergedMulti:
        case ModelKind::TwoChannelMulti: return true;
        case ModelKind::Hybrid: return report.has_screenshot();
    }
    return false;
}

}  // namespace

TimingReport measure_timings(const std::vector<ModelKind>& kinds, const Dataset& dataset,
                             int repetitions, OcrBackend& backend, const ModelConfig& config) {
    if (repetitions < 30)
        throw InvalidConfig("the timing protocol repeats each measurement at least 30 times");
    if (dataset.reports.empty()) throw EmptyCorpus("timing needs a non-empty dataset");

    TimingReport report;

    // Pre-warm the cache once; training is timed without OCR work, matching
    // the accounting where extraction results are saved for retraining.
    OcrCache warm_cache;
    const auto ocr_texts = extract_all(dataset, backend, warm_cache);

    // ocr_time: cold-cache extraction per screenshot attachment.
    {
        std::vector<const Attachment*> screenshots;
        for (const auto& r : dataset.reports)
            for (const auto& att : r.attachments)
                if (att.kind == AttachmentKind::Screenshot) screenshots.push_back(&att);
        if (!screenshots.empty()) {
            auto& samples = report.samples["ocr_time"];
            samples.reserve(static_cast<std::size_t>(repetitions));
            for (int i = 0; i < repetitions; ++i) {
                OcrCache cold;
                const auto& att = *screenshots[static_cast<std::size_t>(i) % screenshots.size()];
                samples.push_back(extract(att, backend, cold).duration_s);
            }
        }
    }

    // training_time per kind.
    for (const auto kind : kinds) {
        auto& samples = report.samples["training_time:" + to_string(kind)];
        samples.reserve(static_cast<std::size_t>(repetitions));
        for (int i = 0; i < repetitions; ++i) {
            const auto start = std::chrono::steady_clock::now();
            const auto model = AssignmentModel::train(dataset, kind, config, ocr_texts);
            samples.push_back(seconds_since(start));
        }
    }

    // response_time per kind: end-to-end assignment of one report, including
    // extraction for attachment-consuming kinds (cold cache per trial).
    std::vector<const IssueReport*> trial_reports;
    for (const auto& r : dataset.reports)
        if (r.has_screenshot()) trial_reports.push_back(&r);
    if (trial_reports.empty())
        for (const auto& r : dataset.reports) trial_reports.push_back(&r);

    for (const auto kind : kinds) {
        const auto model = AssignmentModel::train(dataset, kind, config, ocr_texts);
        auto& samples = report.samples["response_time:" + to_string(kind)];
        samples.reserve(static_cast<std::size_t>(repetitions));
        for (int i = 0; i < repetitions; ++i) {
            const auto& r = *trial_reports[static_cast<std::size_t>(i) % trial_reports.size()];
            const auto start = std::chrono::steady_clock::now();
            std::string text;
            if (consumes_attachments(kind, r)) {
                OcrCache cold;
                for (const auto& att : r.attachments) {
                    if (att.kind != AttachmentKind::Screenshot) continue;
                    if (!text.empty()) text += '\n';
                    text += extract(att, backend, cold).text;
                }
            }
            model.assign(r, text, 0);
            samples.push_back(seconds_since(start));
        }
    }

    return report;
}

}  // namespace triage
