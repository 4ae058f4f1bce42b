// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 triage contributors

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include <triage/errors.hpp>
#include <triage/eval.hpp>
#include <triage/rng.hpp>
#include <triage/util.hpp>

using namespace triage;

namespace {

/// Brute-force metric oracle working straight from the label lists, not the
/// confusion matrix the implementation builds.
struct OracleMetrics {
    double accuracy = 0.0;
    double weighted_precision = 0.0;
    double weighted_recall = 0.0;
    double weighted_f1 = 0.0;
};

OracleMetrics metric_oracle(const std::vector<std::string>& preds,
                            const std::vector<std::string>& truths,
                            const std::vector<std::string>& classes) {
    OracleMetrics out;
    double correct = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (preds[i] == truths[i]) correct += 1.0;
    out.accuracy = correct / static_cast<double>(preds.size());

    double wp = 0.0, wr = 0.0, wf = 0.0, total = 0.0;
    for (const auto& c : classes) {
        double tp = 0.0, pred_c = 0.0, true_c = 0.0;
        for (std::size_t i = 0; i < preds.size(); ++i) {
            if (preds[i] == c) pred_c += 1.0;
            if (truths[i] == c) true_c += 1.0;
            if (preds[i] == c && truths[i] == c) tp += 1.0;
        }
        const double precision = pred_c > 0.0 ? tp / pred_c : 0.0;
        const double recall = true_c > 0.0 ? tp / true_c : 0.0;
        const double f1 = precision + recall > 0.0 ? 2 * precision * recall / (precision + recall) : 0.0;
        wp += true_c * precision;
        wr += true_c * recall;
        wf += true_c * f1;
        total += true_c;
    }
    out.weighted_precision = wp / total;
    out.weighted_recall = wr / total;
    out.weighted_f1 = wf / total;
    return out;
}

/// Exact Wilcoxon oracle: literally enumerates every size-n_a subset of the
/// combined tie-averaged ranks.
double wilcoxon_enumeration_oracle(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> combined = a;
    combined.insert(combined.end(), b.begin(), b.end());
    const std::size_t n = combined.size();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return combined[x] < combined[y]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && combined[order[j + 1]] == combined[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
        i = j + 1;
    }

    double w_obs = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) w_obs += ranks[k];

    std::uint64_t le = 0, ge = 0, total = 0;
    std::vector<bool> select(n, false);
    std::fill(select.begin(), select.begin() + static_cast<std::ptrdiff_t>(a.size()), true);
    std::sort(select.begin(), select.end());
    // iterate all combinations via std::next_permutation over the mask
    do {
        double w = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            if (select[k]) w += ranks[k];
        ++total;
        if (w <= w_obs + 1e-12) ++le;
        if (w >= w_obs - 1e-12) ++ge;
    } while (std::next_permutation(select.begin(), select.end()));

    const double tail = static_cast<double>(std::min(le, ge)) / static_cast<double>(total);
    return std::min(1.0, 2.0 * tail);
}

}  // namespace

TEST_CASE("score basics") {
    const std::vector<std::string> classes = {"a", "b", "c"};

    SUBCASE("all correct") {
        const std::vector<std::string> labels = {"a", "b", "c", "a"};
        const auto report = score(labels, labels, classes, PartitionTag::All);
        CHECK(report.accuracy == 1.0);
        CHECK(report.weighted_precision == 1.0);
        CHECK(report.weighted_recall == 1.0);
        CHECK(report.weighted_f1 == 1.0);
        CHECK(report.trace() == 4);
    }

    SUBCASE("all wrong in a balanced two-class set") {
        const auto report = score({"a", "a", "b", "b"}, {"b", "b", "a", "a"},
                                  {"a", "b"}, PartitionTag::All);
        CHECK(report.accuracy == 0.0);
        CHECK(report.weighted_f1 == 0.0);
    }

    SUBCASE("hand-computed three-class fixture") {
        // supports 3/2/1; confusion rows: a->(2,1,0), b->(0,1,1), c->(1,0,0)
        const std::vector<std::string> truths = {"a", "a", "a", "b", "b", "c"};
        const std::vector<std::string> preds = {"a", "a", "b", "b", "c", "a"};
        const auto report = score(preds, truths, classes, PartitionTag::All);

        CHECK(report.accuracy == doctest::Approx(3.0 / 6.0).epsilon(1e-12));
        CHECK(report.confusion[0][0] == 2);
        CHECK(report.confusion[0][1] == 1);
        CHECK(report.confusion[1][2] == 1);
        CHECK(report.confusion[2][0] == 1);

        // per class: P(a)=2/3, R(a)=2/3; P(b)=1/2, R(b)=1/2; P(c)=0, R(c)=0
        CHECK(report.per_class[0].precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
        CHECK(report.per_class[0].recall == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
        CHECK(report.per_class[1].precision == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(report.per_class[2].precision == 0.0);
        CHECK(report.per_class[2].f1 == 0.0);

        // weighted: (3*(2/3) + 2*0.5 + 1*0) / 6
        const double expected_wp = (3.0 * (2.0 / 3.0) + 2.0 * 0.5 + 0.0) / 6.0;
        CHECK(report.weighted_precision == doctest::Approx(expected_wp).epsilon(1e-12));

        // row sums match supports
        for (std::size_t c = 0; c < classes.size(); ++c) {
            std::int64_t row_sum = 0;
            for (const auto v : report.confusion[c]) row_sum += v;
            CHECK(row_sum == report.per_class[c].support);
        }
    }

    SUBCASE("errors") {
        CHECK_THROWS_AS(score({"a"}, {"a", "b"}, classes, PartitionTag::All), LengthMismatch);
        CHECK_THROWS_AS(score({}, {}, classes, PartitionTag::All), EmptyInput);
    }
}

TEST_CASE("score matches the brute-force oracle on random inputs") {
    Rng rng(31);
    const std::vector<std::string> classes = {"t0", "t1", "t2", "t3", "t4"};
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.below(60);
        std::vector<std::string> preds(n), truths(n);
        for (std::size_t i = 0; i < n; ++i) {
            preds[i] = classes[rng.below(classes.size())];
            truths[i] = classes[rng.below(classes.size())];
        }
        const auto report = score(preds, truths, classes, PartitionTag::All);
        const auto oracle = metric_oracle(preds, truths, classes);
        CHECK(report.accuracy == doctest::Approx(oracle.accuracy).epsilon(1e-12));
        CHECK(report.weighted_precision == doctest::Approx(oracle.weighted_precision).epsilon(1e-12));
        CHECK(report.weighted_recall == doctest::Approx(oracle.weighted_recall).epsilon(1e-12));
        CHECK(report.weighted_f1 == doctest::Approx(oracle.weighted_f1).epsilon(1e-12));
    }
}

TEST_CASE("wilcoxon fixed examples") {
    SUBCASE("identical samples give p = 1 on the exact path") {
        const auto result = wilcoxon_rank_sum({1, 2, 3}, {1, 2, 3});
        CHECK(result.exact);
        CHECK(result.p_value == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("fully separated samples: p = 2 / C(6,3) = 0.1") {
        const auto result = wilcoxon_rank_sum({1, 2, 3}, {4, 5, 6});
        CHECK(result.exact);
        CHECK(result.statistic == doctest::Approx(6.0));  // ranks 1+2+3
        CHECK(result.p_value == doctest::Approx(0.1).epsilon(1e-12));
    }

    SUBCASE("too few samples") {
        CHECK_THROWS_AS(wilcoxon_rank_sum({1.0}, {1.0, 2.0}), TooFewSamples);
    }
}

TEST_CASE("wilcoxon exact path equals full enumeration for n_a, n_b <= 7") {
    Rng rng(17);
    for (std::size_t n_a = 2; n_a <= 7; ++n_a) {
        for (std::size_t n_b = 2; n_b <= 7; ++n_b) {
            // tie-free samples: distinct values by construction
            std::vector<double> pool(n_a + n_b);
            std::iota(pool.begin(), pool.end(), 1.0);
            for (auto& v : pool) v += 0.13 * rng.unit();
            rng.shuffle(pool);
            const std::vector<double> a(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_a));
            const std::vector<double> b(pool.begin() + static_cast<std::ptrdiff_t>(n_a), pool.end());

            const auto exact = wilcoxon_rank_sum(a, b, WilcoxonMethod::Exact);
            const double oracle = wilcoxon_enumeration_oracle(a, b);
            CHECK(exact.p_value == doctest::Approx(oracle).epsilon(1e-12));

            // The normal approximation's worst case over achievable
            // statistics is 0.0881 at (2,2) and 0.0511 at (2,3)/(3,2);
            // every larger pair stays within 0.05 of exact.
            const double bound = (n_a + n_b <= 5) ? 0.09 : 0.05;
            const auto approx = wilcoxon_rank_sum(a, b, WilcoxonMethod::Approximate);
            CHECK(std::abs(approx.p_value - oracle) <= bound);
        }
    }
}

TEST_CASE("wilcoxon detects a strong shift") {
    Rng rng(7);
    std::vector<double> a(30), b(30);
    for (auto& v : a) v = rng.normal(0.0, 1.0);
    for (auto& v : b) v = rng.normal(3.0, 1.0);  // +3 sigma
    const auto result = wilcoxon_rank_sum(a, b);
    CHECK(!result.exact);
    CHECK(result.p_value < 0.001);
}

TEST_CASE("wilcoxon handles tied data in both paths") {
    const std::vector<double> a = {1, 1, 2, 2};
    const std::vector<double> b = {1, 2, 2, 3};
    const auto exact = wilcoxon_rank_sum(a, b, WilcoxonMethod::Exact);
    const double oracle = wilcoxon_enumeration_oracle(a, b);
    CHECK(exact.p_value == doctest::Approx(oracle).epsilon(1e-12));
    const auto approx = wilcoxon_rank_sum(a, b, WilcoxonMethod::Approximate);
    CHECK(approx.p_value > 0.05);  // clearly not significant
}

namespace {

Dataset experiment_dataset(int n_reports, std::uint64_t seed) {
    SynthConfig cfg;
    cfg.n_reports = n_reports;
    cfg.n_teams = 5;
    cfg.seed = seed;
    return filter_resolved(generate(cfg));
}

}  // namespace

TEST_CASE("run_experiment") {
    const auto dataset = experiment_dataset(600, 11);
    OcrCache cache;
    StubBackend unused(0.0, "");
    const auto ocr_texts = extract_all(dataset, unused, cache);

    ExperimentSpec spec;
    spec.kinds = {ModelKind::TextOnly, ModelKind::TwoChannelMulti, ModelKind::Hybrid};
    spec.repetitions = 3;
    spec.seed = 4;

    SUBCASE("deterministic rerun") {
        const auto r1 = run_experiment(dataset, spec, ocr_texts);
        const auto r2 = run_experiment(dataset, spec, ocr_texts);
        CHECK(r1.summary().dump() == r2.summary().dump());
        for (std::size_t i = 0; i < r1.rows.size(); ++i)
            CHECK(r1.rows[i].split_fingerprint == r2.rows[i].split_fingerprint);
    }

    SUBCASE("parallel repetitions match sequential") {
        const auto seq = run_experiment(dataset, spec, ocr_texts, 1);
        const auto par = run_experiment(dataset, spec, ocr_texts, 4);
        CHECK(seq.summary().dump() == par.summary().dump());
    }

    SUBCASE("hybrid decomposition identity holds in every repetition") {
        const auto result = run_experiment(dataset, spec, ocr_texts);
        for (const auto& row : result.rows) {
            const auto& hybrid = row.results.at(ModelKind::Hybrid);
            const auto& all = hybrid[static_cast<std::size_t>(PartitionTag::All)];
            const auto& ws = hybrid[static_cast<std::size_t>(PartitionTag::WithScreenshots)];
            const auto& wo = hybrid[static_cast<std::size_t>(PartitionTag::WithoutScreenshots)];
            REQUIRE(all.has_value());
            REQUIRE(ws.has_value());
            REQUIRE(wo.has_value());
            CHECK(all->trace() == ws->trace() + wo->trace());
            CHECK(all->n == ws->n + wo->n);
            // the float identity follows from the exact integer one
            const double combined = (static_cast<double>(ws->n) * ws->accuracy +
                                     static_cast<double>(wo->n) * wo->accuracy) /
                                    static_cast<double>(all->n);
            CHECK(all->accuracy == doctest::Approx(combined).epsilon(1e-12));
        }
    }

    SUBCASE("write/read round-trip preserves the accuracy series") {
        const auto result = run_experiment(dataset, spec, ocr_texts);
        const auto dir = std::filesystem::temp_directory_path() / "triage-eval-tests" / "exp";
        std::filesystem::remove_all(dir);
        result.write(dir);
        const auto reread = ExperimentResult::read(dir);
        for (const auto kind : spec.kinds) {
            for (const auto tag : {PartitionTag::WithScreenshots, PartitionTag::All}) {
                CHECK(result.accuracies(kind, tag) == reread.accuracies(kind, tag));
            }
        }
    }

    SUBCASE("screenshot-free corpus flags the empty partition") {
        SynthConfig cfg;
        cfg.n_reports = 200;
        cfg.n_teams = 4;
        cfg.p_attachment = 0.0;
        cfg.seed = 2;
        const auto no_shots = filter_resolved(generate(cfg));
        OcrCache c2;
        const auto texts = extract_all(no_shots, unused, c2);
        ExperimentSpec s2;
        s2.kinds = {ModelKind::TextOnly};
        s2.repetitions = 1;
        const auto result = run_experiment(no_shots, s2, texts);
        const auto& parts = result.rows[0].results.at(ModelKind::TextOnly);
        CHECK(!parts[static_cast<std::size_t>(PartitionTag::WithScreenshots)].has_value());
        CHECK(parts[static_cast<std::size_t>(PartitionTag::All)].has_value());
        CHECK(result.accuracies(ModelKind::TextOnly, PartitionTag::WithScreenshots).empty());
    }

    SUBCASE("unfiltered datasets are rejected") {
        auto reports = dataset.reports;
        reports[0].status = Status::Other;
        const auto raw = Dataset::from_reports(std::move(reports));
        CHECK_THROWS_AS(run_experiment(raw, spec, ocr_texts), Error);
    }
}

TEST_CASE("fixed-window mode resamples training from the earlier pool") {
    const auto dataset = experiment_dataset(800, 21);
    OcrCache cache;
    StubBackend unused(0.0, "");
    const auto ocr_texts = extract_all(dataset, unused, cache);

    // window = last month of the generated range
    ExperimentSpec spec;
    spec.kinds = {ModelKind::TextOnly};
    spec.repetitions = 2;
    spec.mode = ExperimentSpec::Mode::FixedWindow;
    spec.window_start = *parse_rfc3339("2019-08-01T00:00:00Z");
    spec.window_end = *parse_rfc3339("2019-09-01T00:00:00Z");

    const auto result = run_experiment(dataset, spec, ocr_texts);
    REQUIRE(result.rows.size() == 2);
    // test set fixed across repetitions, training set varies
    const auto& r0 = result.rows[0].results.at(ModelKind::TextOnly);
    const auto& r1 = result.rows[1].results.at(ModelKind::TextOnly);
    CHECK(r0[static_cast<std::size_t>(PartitionTag::All)]->n ==
          r1[static_cast<std::size_t>(PartitionTag::All)]->n);
    CHECK(result.rows[0].split_fingerprint != result.rows[1].split_fingerprint);
}

TEST_CASE("timing summary matches hand-computed statistics") {
    // mean 3, sample std sqrt(2.5), median 3
    const std::vector<double> durations = {1.0, 2.0, 3.0, 4.0, 5.0};
    const auto stats = summarize_timings(durations);
    CHECK(stats.mean == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(stats.stddev == doctest::Approx(std::sqrt(2.5)).epsilon(1e-12));
    CHECK(stats.min == 1.0);
    CHECK(stats.max == 5.0);
    CHECK(stats.median == 3.0);

    SUBCASE("even count medians average the middle pair") {
        const auto s = summarize_timings({4.0, 1.0, 3.0, 2.0});
        CHECK(s.median == doctest::Approx(2.5).epsilon(1e-12));
        CHECK(s.min <= s.median);
        CHECK(s.median <= s.max);
    }

    SUBCASE("empty input rejected") { CHECK_THROWS_AS(summarize_timings({}), EmptyInput); }
}

TEST_CASE("timing harness with a constant-delay stub") {
    // hash-only attachments force the backend to run
    std::vector<IssueReport> reports;
    for (int i = 0; i < 40; ++i) {
        IssueReport r;
        r.id = "t" + std::to_string(i);
        r.summary = "issue number " + std::to_string(i % 7);
        r.description = "details " + std::to_string(i % 5);
        r.assignee = i % 2 == 0 ? "alpha" : "beta";
        r.created_at = 1000 + i;
        r.status = Status::Resolved;
        Attachment a;
        a.id = r.id + "-a0";
        a.kind = AttachmentKind::Screenshot;
        a.hash = "h" + std::to_string(i);
        r.attachments.push_back(a);
        reports.push_back(std::move(r));
    }
    const auto dataset = Dataset::from_reports(std::move(reports));

    StubBackend stub(0.010, "stub screen text");
    ModelConfig cfg;
    const auto report = measure_timings({ModelKind::TextOnly, ModelKind::TwoChannelMulti}, dataset,
                                        30, stub, cfg);

    const auto ocr = report.stats("ocr_time");
    CHECK(ocr.mean == doctest::Approx(0.010).epsilon(0.5));  // ~10ms, scheduler slack
    CHECK(ocr.mean >= 0.010);
    CHECK(ocr.stddev < 0.005);

    const auto& text_rt = report.samples.at("response_time:text-only");
    const auto& two_rt = report.samples.at("response_time:two-channel-multi");
    REQUIRE(text_rt.size() == 30);
    REQUIRE(two_rt.size() == 30);
    int two_slower = 0;
    for (std::size_t i = 0; i < 30; ++i)
        if (two_rt[i] > text_rt[i]) ++two_slower;
    CHECK(two_slower >= 28);  // OCR is a strict superset of the work

    CHECK_THROWS_AS(measure_timings({ModelKind::TextOnly}, dataset, 5, stub, cfg), InvalidConfig);
}
