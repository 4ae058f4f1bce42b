// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 triage contributors

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "triage/corpus.hpp"
#include "triage/models.hpp"
#include "triage/ocr.hpp"

namespace triage {

enum class PartitionTag { WithScreenshots, WithoutScreenshots, All };

std::string to_string(PartitionTag tag);
PartitionTag partition_from_string(const std::string& name);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::int64_t support = 0;
};

/// accuracy = trace(confusion) / n; weighted metrics are support-weighted
/// means over classes with non-zero support. Precision of a class nothing
/// was assigned to is 0 by convention.
struct EvalReport {
    std::int64_t n = 0;
    double accuracy = 0.0;
    std::vector<ClassMetrics> per_class;                 // aligned with class_list
    double weighted_precision = 0.0;
    double weighted_recall = 0.0;
    double weighted_f1 = 0.0;
    std::vector<std::vector<std::int64_t>> confusion;    // [truth][predicted]
    PartitionTag partition = PartitionTag::All;

    std::int64_t trace() const;
};

EvalReport score(const std::vector<std::string>& predictions, const std::vector<std::string>& truths,
                 const std::vector<std::string>& class_list, PartitionTag tag);

enum class WilcoxonMethod { Auto, Exact, Approximate };

/// Two-sample Wilcoxon rank-sum test. The statistic is the rank sum of
/// sample a with average-tie ranks. Auto uses exact enumeration (a dynamic
/// program over the C(n, n_a) rank assignments) when n_a + n_b <= 20 and
/// the data is tie-free, and a tie-corrected normal approximation with 0.5
/// continuity correction otherwise.
struct WilcoxonResult {
    double statistic = 0.0;
    double p_value = 1.0;
    bool exact = false;
};

WilcoxonResult wilcoxon_rank_sum(const std::vector<double>& a, const std::vector<double>& b,
                                 WilcoxonMethod method = WilcoxonMethod::Auto);

struct ExperimentSpec {
    enum class Mode { RandomHoldout, FixedWindow };

    std::vector<ModelKind> kinds;
    int repetitions = 30;
    double train_fraction = 0.8;
    std::uint64_t seed = 1;
    Mode mode = Mode::RandomHoldout;
    // FixedWindow: test = reports with created_at in [window_start, window_end);
    // each repetition resamples the training set from the earlier pool until
    // train:test reaches train_fraction : 1 - train_fraction.
    std::int64_t window_start = 0;
    std::int64_t window_end = 0;
    ModelConfig model;

    nlohmann::json to_json() const;
    static ExperimentSpec from_json(const nlohmann::json& j);
};

struct RepetitionRow {
    int repetition = 0;
    std::uint64_t split_fingerprint = 0;
    std::map<ModelKind, std::array<std::optional<EvalReport>, 3>> results;  // indexed by PartitionTag
};

struct ExperimentResult {
    ExperimentSpec spec;
    std::vector<std::string> class_list;
    std::vector<RepetitionRow> rows;

    std::vector<double> accuracies(ModelKind kind, PartitionTag tag) const;
    std::vector<double> weighted_f1s(ModelKind kind, PartitionTag tag) const;
    nlohmann::json summary() const;

    void write(const std::filesystem::path& dir) const;
    static ExperimentResult read(const std::filesystem::path& dir);
};

/// Runs the repeated-holdout protocol: per repetition one split, every kind
/// trained on the identical train set and scored on the identical test set,
/// reported per partition. Repetitions may run in parallel; results are
/// keyed by repetition index so aggregation is order-independent.
ExperimentResult run_experiment(const Dataset& dataset, const ExperimentSpec& spec,
                                const std::map<std::string, std::string>& ocr_texts,
                                int threads = 1);

struct TimingSummary {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation (n - 1)
    double max = 0.0;
    double min = 0.0;
    double median = 0.0;
};

TimingSummary summarize_timings(std::vector<double> samples);

/// Raw timing samples keyed by metric name: "ocr_time",
/// "training_time:<kind>", "response_time:<kind>". Response times include
/// OCR for attachment-consuming kinds; training times do not (the cache is
/// pre-warmed first).
struct TimingReport {
    std::map<std::string, std::vector<double>> samples;
    TimingSummary stats(const std::string& metric) const;
};

TimingReport measure_timings(const std::vector<ModelKind>& kinds, const Dataset& dataset,
                             int repetitions, OcrBackend& backend, const ModelConfig& config);

}  // namespace triage
