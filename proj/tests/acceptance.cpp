// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 triage contributors

// Acceptance suite: runs every release criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit code is the number of failed
// criteria. `acceptance_tests --only N` runs a single criterion.

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <triage/corpus.hpp>
#include <triage/eval.hpp>
#include <triage/models.hpp>
#include <triage/monitor.hpp>
#include <triage/ocr.hpp>
#include <triage/rng.hpp>
#include <triage/service.hpp>
#include <triage/svm.hpp>
#include <triage/util.hpp>
#include <triage/vectorizer.hpp>

using namespace triage;

namespace {

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void require(bool condition, const std::string& what) {
        if (!condition) {
            ok = false;
            if (detail.tellp() > 0) detail << "; ";
            detail << what;
        }
    }

    void note(const std::string& what) {
        if (detail.tellp() > 0) detail << "; ";
        detail << what;
    }
};

double now_s() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

double mean_of(const std::vector<double>& values) {
    double m = 0.0;
    for (const double v : values) m += v;
    return m / static_cast<double>(values.size());
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// criterion 1: tf-idf transform equals an independent dense recomputation
// within 1e-9 per component on 50 random corpora (<=50 docs, <=200 terms).

void criterion_1(Check& check) {
    Rng rng(1001);
    std::vector<std::string> lexicon;
    for (int i = 0; i < 200; ++i) lexicon.push_back("term" + std::to_string(i));

    double worst = 0.0;
    for (int corpus_idx = 0; corpus_idx < 50; ++corpus_idx) {
        const std::size_t n_docs = 1 + rng.below(50);
        std::vector<std::vector<std::string>> corpus(n_docs);
        for (auto& doc : corpus) {
            const std::size_t len = rng.below(60);
            for (std::size_t i = 0; i < len; ++i) doc.push_back(lexicon[rng.below(lexicon.size())]);
        }
        const auto model = TfIdfModel::fit(corpus);
        const auto& vocab = model.terms();

        for (const auto& doc : corpus) {
            const auto sparse = model.transform(doc);
            std::vector<double> got(vocab.size(), 0.0);
            for (const auto& [idx, value] : sparse.entries) got[idx] = value;

            // independent dense recomputation of count * idf, L2-normalized
            std::vector<double> expected(vocab.size(), 0.0);
            for (std::size_t j = 0; j < vocab.size(); ++j) {
                double df = 0.0;
                for (const auto& d : corpus)
                    if (std::find(d.begin(), d.end(), vocab[j]) != d.end()) df += 1.0;
                double count = 0.0;
                for (const auto& term : doc)
                    if (term == vocab[j]) count += 1.0;
                expected[j] =
                    count * (std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + df)) + 1.0);
            }
            double norm = 0.0;
            for (const double v : expected) norm += v * v;
            if (norm > 0.0) {
                norm = std::sqrt(norm);
                for (auto& v : expected) v /= norm;
            }
            for (std::size_t j = 0; j < vocab.size(); ++j)
                worst = std::max(worst, std::abs(got[j] - expected[j]));
        }
    }
    check.require(worst <= 1e-9, "worst component deviation " + fmt(worst) + " > 1e-9");
    check.note("worst deviation " + fmt(worst));
}

// ---------------------------------------------------------------------------
// criterion 2: SVM correctness on a seeded 4-class, 200-point separable set.

void criterion_2(Check& check) {
    Rng data_rng(11);
    std::vector<SparseVector> x;
    std::vector<std::string> labels;
    for (int i = 0; i < 200; ++i) {
        const int k = i % 4;
        SparseVector v;
        v.dim = 9;
        v.entries = {{static_cast<std::uint32_t>(2 * k), 0.8 + 0.4 * data_rng.unit()},
                     {static_cast<std::uint32_t>(2 * k + 1), 0.8 + 0.4 * data_rng.unit()},
                     {8, 0.05 * data_rng.unit()}};
        x.push_back(std::move(v));
        labels.push_back("class-" + std::to_string(k));
    }

    TrainConfig cfg;
    cfg.seed = 3;
    cfg.max_iter = 20000;  // tol 1e-4 needs ~1.3k passes here
    TrainTrace trace;
    const auto model = LinearModel::train(x, labels, cfg, &trace);

    int correct = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (model.predict(x[i]) == labels[i]) ++correct;
    check.require(correct == 200, "training accuracy " + fmt(correct / 200.0) + " != 1.0");

    for (std::size_t k = 0; k < trace.min_alpha.size(); ++k) {
        check.require(trace.min_alpha[k] >= 0.0, "dual variable below 0 for class " + std::to_string(k));
        check.require(trace.max_alpha[k] <= cfg.c + 1e-15,
                      "dual variable above c for class " + std::to_string(k));
    }
    for (const auto& info : model.train_info())
        check.require(info.final_violation <= cfg.tol,
                      "final violation " + fmt(info.final_violation) + " > tol");

    const auto rerun = LinearModel::train(x, labels, cfg);
    check.require(rerun.to_json().dump() == model.to_json().dump(),
                  "model not byte-identical across reruns");
}

// ---------------------------------------------------------------------------
// criterion 3: Wilcoxon fidelity.

void criterion_3(Check& check) {
    // (a) exact path equals full enumeration for all tie-free n_a, n_b <= 7,
    // evaluated exhaustively: every subset of ranks realizes one dataset.
    double worst_exact = 0.0;
    double worst_approx = 0.0;
    std::string worst_approx_at;
    for (std::size_t n_a = 2; n_a <= 7; ++n_a) {
        for (std::size_t n_b = 2; n_b <= 7; ++n_b) {
            const std::size_t n = n_a + n_b;
            std::vector<bool> mask(n, false);
            std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(n_a), true);
            std::sort(mask.begin(), mask.end());
            do {
                std::vector<double> a, b;
                for (std::size_t i = 0; i < n; ++i)
                    (mask[i] ? a : b).push_back(static_cast<double>(i + 1));

                // enumeration oracle over the same subsets
                std::vector<bool> sub(n, false);
                std::fill(sub.begin(), sub.begin() + static_cast<std::ptrdiff_t>(n_a), true);
                std::sort(sub.begin(), sub.end());
                double w_obs = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    if (mask[i]) w_obs += static_cast<double>(i + 1);
                std::uint64_t le = 0, ge = 0, total = 0;
                do {
                    double w = 0.0;
                    for (std::size_t i = 0; i < n; ++i)
                        if (sub[i]) w += static_cast<double>(i + 1);
                    ++total;
                    if (w <= w_obs) ++le;
                    if (w >= w_obs) ++ge;
                } while (std::next_permutation(sub.begin(), sub.end()));
                const double oracle =
                    std::min(1.0, 2.0 * static_cast<double>(std::min(le, ge)) /
                                      static_cast<double>(total));

                const auto exact = wilcoxon_rank_sum(a, b, WilcoxonMethod::Exact);
                worst_exact = std::max(worst_exact, std::abs(exact.p_value - oracle));

                const auto approx = wilcoxon_rank_sum(a, b, WilcoxonMethod::Approximate);
                const double dev = std::abs(approx.p_value - oracle);
                if (dev > worst_approx) {
                    worst_approx = dev;
                    worst_approx_at = "(n_a=" + std::to_string(n_a) + ", n_b=" + std::to_string(n_b) +
                                      ", W=" + fmt(exact.statistic) + ")";
                }
            } while (std::next_permutation(mask.begin(), mask.end()));
        }
    }
    check.require(worst_exact <= 1e-12,
                  "exact path deviates from enumeration by " + fmt(worst_exact));

    // (b) the stated 0.05 bound on the normal approximation. The standard
    // formula (tie correction + 0.5 continuity correction, identical to the
    // common scientific implementations) exceeds it at the smallest sizes.
    check.require(worst_approx <= 0.05, "approximation deviates from exact by " + fmt(worst_approx) +
                                            " at " + worst_approx_at + " > 0.05");

    // (c) the fixed example
    const auto example = wilcoxon_rank_sum({1, 2, 3}, {4, 5, 6});
    check.require(example.exact, "example did not use the exact path");
    check.require(std::abs(example.p_value - 0.1) <= 1e-12,
                  "exact p for [1,2,3] vs [4,5,6] is " + fmt(example.p_value) + ", expected 0.1");
}

// ---------------------------------------------------------------------------
// criterion 4: metric oracle on 100 random confusion matrices.

void criterion_4(Check& check) {
    Rng rng(44);
    const std::vector<std::string> classes = {"c0", "c1", "c2", "c3", "c4", "c5"};
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.below(200);
        std::vector<std::string> preds(n), truths(n);
        for (std::size_t i = 0; i < n; ++i) {
            preds[i] = classes[rng.below(classes.size())];
            truths[i] = classes[rng.below(classes.size())];
        }
        const auto report = score(preds, truths, classes, PartitionTag::All);

        // brute force straight from the label lists
        double correct = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (preds[i] == truths[i]) correct += 1.0;
        double wp = 0.0, wr = 0.0, wf = 0.0, total = 0.0;
        for (const auto& c : classes) {
            double tp = 0.0, pred_c = 0.0, true_c = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (preds[i] == c) pred_c += 1.0;
                if (truths[i] == c) true_c += 1.0;
                if (preds[i] == c && truths[i] == c) tp += 1.0;
            }
            const double precision = pred_c > 0.0 ? tp / pred_c : 0.0;
            const double recall = true_c > 0.0 ? tp / true_c : 0.0;
            const double f1 =
                precision + recall > 0.0 ? 2 * precision * recall / (precision + recall) : 0.0;
            wp += true_c * precision;
            wr += true_c * recall;
            wf += true_c * f1;
            total += true_c;
        }
        worst = std::max(worst, std::abs(report.accuracy - correct / static_cast<double>(n)));
        worst = std::max(worst, std::abs(report.weighted_precision - wp / total));
        worst = std::max(worst, std::abs(report.weighted_recall - wr / total));
        worst = std::max(worst, std::abs(report.weighted_f1 - wf / total));
    }
    check.require(worst <= 1e-12, "worst metric deviation " + fmt(worst) + " > 1e-12");
    check.note("worst deviation " + fmt(worst));
}

// ---------------------------------------------------------------------------
// criterion 5: direction of effect on the default synthetic family.

void criterion_5(Check& check) {
    std::vector<double> text_acc, two_acc;
    for (std::uint64_t corpus_seed = 1; corpus_seed <= 10; ++corpus_seed) {
        SynthConfig synth;  // defaults: 10k reports, 20 teams, p_signal 0.5
        synth.seed = corpus_seed;
        const auto dataset = filter_resolved(generate(synth));
        OcrCache cache;
        StubBackend unused(0.0, "");
        const auto ocr_texts = extract_all(dataset, unused, cache);

        ExperimentSpec spec;
        spec.kinds = {ModelKind::TextOnly, ModelKind::TwoChannelMulti};
        spec.repetitions = 3;  // 10 corpora x 3 repetitions = 30 paired samples
        spec.seed = corpus_seed;
        const auto result = run_experiment(dataset, spec, ocr_texts, 1);

        const auto t = result.accuracies(ModelKind::TextOnly, PartitionTag::WithScreenshots);
        const auto w = result.accuracies(ModelKind::TwoChannelMulti, PartitionTag::WithScreenshots);
        text_acc.insert(text_acc.end(), t.begin(), t.end());
        two_acc.insert(two_acc.end(), w.begin(), w.end());
    }
    check.require(text_acc.size() == 30 && two_acc.size() == 30, "expected 30 repetitions");

    const double gap = mean_of(two_acc) - mean_of(text_acc);
    check.require(gap >= 0.05, "mean accuracy gap " + fmt(gap) + " < 0.05");

    const auto test = wilcoxon_rank_sum(two_acc, text_acc);
    check.require(test.p_value < 0.05, "wilcoxon p " + fmt(test.p_value) + " >= 0.05");
    check.note("two-channel " + fmt(mean_of(two_acc)) + " vs text-only " + fmt(mean_of(text_acc)) +
               ", gap " + fmt(gap) + ", p " + fmt(test.p_value));
}

// ---------------------------------------------------------------------------
// criterion 6: two-channel vs merged under systematic OCR noise.

void criterion_6(Check& check) {
    std::vector<double> merged_acc, two_acc;
    for (std::uint64_t corpus_seed = 1; corpus_seed <= 10; ++corpus_seed) {
        SynthConfig synth;
        synth.seed = corpus_seed;
        synth.ocr_noise.enabled = true;
        const auto dataset = filter_resolved(generate(synth));
        OcrCache cache;
        StubBackend unused(0.0, "");
        const auto ocr_texts = extract_all(dataset, unused, cache);

        ExperimentSpec spec;
        spec.kinds = {ModelKind::MergedMulti, ModelKind::TwoChannelMulti};
        spec.repetitions = 1;
        spec.seed = corpus_seed;
        const auto result = run_experiment(dataset, spec, ocr_texts, 1);

        const auto m = result.accuracies(ModelKind::MergedMulti, PartitionTag::WithScreenshots);
        const auto w = result.accuracies(ModelKind::TwoChannelMulti, PartitionTag::WithScreenshots);
        merged_acc.insert(merged_acc.end(), m.begin(), m.end());
        two_acc.insert(two_acc.end(), w.begin(), w.end());
    }
    check.require(merged_acc.size() == 10 && two_acc.size() == 10, "expected 10 repetitions");
    check.require(mean_of(two_acc) >= mean_of(merged_acc),
                  "two-channel mean " + fmt(mean_of(two_acc)) + " < merged mean " +
                      fmt(mean_of(merged_acc)));
    check.note("two-channel " + fmt(mean_of(two_acc)) + " vs merged " + fmt(mean_of(merged_acc)));
}

// ---------------------------------------------------------------------------
// criterion 7: hybrid decomposition identity and direction.

void criterion_7(Check& check) {
    SynthConfig synth;
    synth.seed = 1;
    const auto dataset = filter_resolved(generate(synth));
    OcrCache cache;
    StubBackend unused(0.0, "");
    const auto ocr_texts = extract_all(dataset, unused, cache);

    ExperimentSpec spec;
    spec.kinds = {ModelKind::TwoChannelMulti, ModelKind::Hybrid};
    spec.repetitions = 10;
    spec.seed = 7;
    const auto result = run_experiment(dataset, spec, ocr_texts, 1);

    for (const auto& row : result.rows) {
        const auto& hybrid = row.results.at(ModelKind::Hybrid);
        const auto& all = hybrid[static_cast<std::size_t>(PartitionTag::All)];
        const auto& ws = hybrid[static_cast<std::size_t>(PartitionTag::WithScreenshots)];
        const auto& wo = hybrid[static_cast<std::size_t>(PartitionTag::WithoutScreenshots)];
        if (!all || !ws || !wo) {
            check.require(false, "missing partition in repetition " + std::to_string(row.repetition));
            continue;
        }
        // exact identity in integer counts, hence exact in the quotient
        check.require(all->trace() == ws->trace() + wo->trace(),
                      "trace mismatch in repetition " + std::to_string(row.repetition));
        check.require(all->n == ws->n + wo->n,
                      "support mismatch in repetition " + std::to_string(row.repetition));
        const double combined = (static_cast<double>(ws->n) * ws->accuracy +
                                 static_cast<double>(wo->n) * wo->accuracy) /
                                static_cast<double>(all->n);
        check.require(std::abs(all->accuracy - combined) <= 1e-12,
                      "accuracy identity off by " + fmt(std::abs(all->accuracy - combined)));
    }

    const auto hybrid_wo = result.accuracies(ModelKind::Hybrid, PartitionTag::WithoutScreenshots);
    const auto two_wo = result.accuracies(ModelKind::TwoChannelMulti, PartitionTag::WithoutScreenshots);
    check.require(mean_of(hybrid_wo) >= mean_of(two_wo),
                  "hybrid " + fmt(mean_of(hybrid_wo)) + " < two-channel " + fmt(mean_of(two_wo)) +
                      " on the without-screenshots partition");
    check.note("without-screenshots: hybrid " + fmt(mean_of(hybrid_wo)) + " vs two-channel " +
               fmt(mean_of(two_wo)));
}

// ---------------------------------------------------------------------------
// criterion 8: timing harness.

void criterion_8(Check& check) {
    // (a) aggregator reproduces hand-computed statistics
    const auto stats = summarize_timings({0.5, 1.0, 1.5, 2.0, 2.5});
    check.require(std::abs(stats.mean - 1.5) <= 1e-9, "mean " + fmt(stats.mean));
    check.require(std::abs(stats.stddev - std::sqrt(0.625)) <= 1e-9, "std " + fmt(stats.stddev));
    check.require(std::abs(stats.median - 1.5) <= 1e-9, "median " + fmt(stats.median));
    check.require(stats.min == 0.5 && stats.max == 2.5, "min/max wrong");

    // (b) 10 ms stub: two-channel response dominates text-only in >= 28/30
    std::vector<IssueReport> reports;
    for (int i = 0; i < 60; ++i) {
        IssueReport r;
        r.id = "t" + std::to_string(i);
        r.summary = "issue number " + std::to_string(i % 9);
        r.description = "details " + std::to_string(i % 7);
        r.assignee = i % 3 == 0 ? "alpha" : (i % 3 == 1 ? "beta" : "gamma");
        r.created_at = 1000 + i;
        r.status = Status::Resolved;
        Attachment a;
        a.id = r.id + "-a0";
        a.kind = AttachmentKind::Screenshot;
        a.hash = "h" + std::to_string(i);  // hash-only: extraction must run the backend
        r.attachments.push_back(a);
        reports.push_back(std::move(r));
    }
    const auto timing_dataset = Dataset::from_reports(std::move(reports));
    StubBackend stub(0.010, "stub screen text");
    ModelConfig cfg;
    const auto timing =
        measure_timings({ModelKind::TextOnly, ModelKind::TwoChannelMulti}, timing_dataset, 30, stub, cfg);

    const auto ocr_stats = timing.stats("ocr_time");
    check.require(ocr_stats.mean >= 0.010 && ocr_stats.mean <= 0.020,
                  "stub ocr mean " + fmt(ocr_stats.mean) + " not ~0.01 s");

    const auto& text_rt = timing.samples.at("response_time:text-only");
    const auto& two_rt = timing.samples.at("response_time:two-channel-multi");
    int slower = 0;
    for (std::size_t i = 0; i < 30; ++i)
        if (two_rt[i] > text_rt[i]) ++slower;
    check.require(slower >= 28, "two-channel slower in only " + std::to_string(slower) + "/30 trials");
    check.note("two-channel slower in " + std::to_string(slower) + "/30 trials, stub ocr mean " +
               fmt(ocr_stats.mean) + " s");

    // (c) training 10k synthetic reports completes < 60 s
    SynthConfig synth;
    synth.seed = 1;
    const auto big = filter_resolved(generate(synth));
    OcrCache cache;
    StubBackend unused(0.0, "");
    const auto ocr_texts = extract_all(big, unused, cache);
    const double t0 = now_s();
    const auto model = AssignmentModel::train(big, ModelKind::TwoChannelMulti, cfg, ocr_texts);
    const double train_time = now_s() - t0;
    (void)model;
    check.require(train_time < 60.0, "training took " + fmt(train_time) + " s >= 60 s");
    check.note("10k training " + fmt(train_time) + " s");
}

// ---------------------------------------------------------------------------
// criterion 9: change-point localization.

void criterion_9(Check& check) {
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        std::vector<AccuracyPoint> points;
        for (int i = 0; i < 60; ++i) {
            const double mean = i < 30 ? 0.88 : 0.80;
            points.push_back({static_cast<std::int64_t>(18000 + i),
                              std::clamp(rng.normal(mean, 0.02), 0.0, 1.0), 300});
        }
        const auto series = AccuracySeries::from_points(std::move(points));
        const auto change_points = detect_change_points(series);
        for (const auto p : change_points) {
            if (p >= 29 && p <= 31) {
                ++hits;
                break;
            }
        }
    }
    check.require(hits >= 95, "shift located within +-1 in only " + std::to_string(hits) + "/100 trials");
    check.note(std::to_string(hits) + "/100 within +-1");

    std::vector<AccuracyPoint> flat;
    for (int i = 0; i < 60; ++i)
        flat.push_back({static_cast<std::int64_t>(18000 + i), 0.85, 300});
    const auto none = detect_change_points(AccuracySeries::from_points(std::move(flat)));
    check.require(none.empty(), "constant series produced " + std::to_string(none.size()) +
                                    " change points");
}

// ---------------------------------------------------------------------------
// criterion 10: HTTP service vs batch predict, bit-exact on 200 fixtures.

void criterion_10(Check& check) {
    SynthConfig synth;
    synth.n_reports = 230;
    synth.n_teams = 8;
    synth.seed = 10;
    const auto dataset = filter_resolved(generate(synth));
    OcrCache cache;
    StubBackend unused(0.0, "");
    const auto ocr_texts = extract_all(dataset, unused, cache);

    ModelConfig cfg;
    const auto model = AssignmentModel::train(dataset, ModelKind::Hybrid, cfg, ocr_texts);
    const auto bundle_dir =
        std::filesystem::temp_directory_path() / "triage-acceptance" / "bundle";
    std::filesystem::remove_all(bundle_dir);
    model.save(bundle_dir, dataset_fingerprint(dataset));

    AssignmentService service(bundle_dir, nullptr);
    service.start("127.0.0.1", 0);
    httplib::Client client("127.0.0.1", service.bound_port());
    client.set_read_timeout(10, 0);

    int compared = 0, mismatched = 0;
    for (const auto& report : dataset.reports) {
        if (compared >= 200) break;
        ++compared;
        const auto expected =
            assignment_result_to_json(model.assign(report, ocr_texts.at(report.id), 5), 5);

        nlohmann::json body{{"summary", report.summary}, {"description", report.description}};
        nlohmann::json atts = nlohmann::json::array();
        for (const auto& a : report.attachments) {
            nlohmann::json aj{{"kind", a.kind == AttachmentKind::Screenshot ? "screenshot" : "other"}};
            if (a.text) aj["text"] = *a.text;
            atts.push_back(aj);
        }
        if (!atts.empty()) body["attachments"] = atts;

        const auto res = client.Post("/assign", body.dump(), "application/json");
        if (!res || res->status != 200) {
            ++mismatched;
            continue;
        }
        auto got = nlohmann::json::parse(res->body);
        got.erase("latency_s");
        if (got.dump() != expected.dump()) ++mismatched;
    }
    service.stop();

    check.require(compared == 200, "only " + std::to_string(compared) + " fixtures compared");
    check.require(mismatched == 0, std::to_string(mismatched) + "/200 responses differ from batch");
    check.note("200/200 responses bit-identical to batch predict");
}

struct Criterion {
    int number;
    std::string name;
    std::function<void(Check&)> run;
    double budget_s;  // 0 = no stated budget
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);
    }

    const std::vector<Criterion> criteria = {
        {1, "tf-idf oracle equivalence", criterion_1, 10.0},
        {2, "SVM correctness on a separable set", criterion_2, 5.0},
        {3, "Wilcoxon fidelity", criterion_3, 30.0},
        {4, "metric oracle", criterion_4, 0.0},
        {5, "direction of effect: two-channel vs text-only", criterion_5, 600.0},
        {6, "two-channel vs merged under OCR noise", criterion_6, 0.0},
        {7, "hybrid decomposition identity and direction", criterion_7, 0.0},
        {8, "timing harness", criterion_8, 0.0},
        {9, "change-point localization", criterion_9, 0.0},
        {10, "service equals batch predict", criterion_10, 0.0},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        if (only != 0 && criterion.number != only) continue;
        Check check;
        const double t0 = now_s();
        try {
            criterion.run(check);
        } catch (const std::exception& e) {
            check.require(false, std::string("exception: ") + e.what());
        }
        const double elapsed = now_s() - t0;
        if (criterion.budget_s > 0.0 && elapsed >= criterion.budget_s) {
            check.require(false, "runtime " + fmt(elapsed) + " s exceeded budget " +
                                     fmt(criterion.budget_s) + " s");
        }

        const std::string detail = check.detail.str();
        std::printf("[%s] criterion %d: %s (%.1f s)%s%s\n", check.ok ? "PASS" : "FAIL",
                    criterion.number, criterion.name.c_str(), elapsed,
                    detail.empty() ? "" : " -- ", detail.c_str());
        std::fflush(stdout);
        if (!check.ok) ++failures;
    }

    if (only == 0) {
        std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
                    criteria.size());
    }
    return failures;
}
