// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 triage contributors

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace triage {

struct AccuracyPoint {
    std::int64_t date = 0;  // days since epoch
    double accuracy = 0.0;
    std::int64_t n_assignments = 0;
};

/// Daily accuracy series; dates strictly increasing, accuracies in [0, 1].
struct AccuracySeries {
    std::vector<AccuracyPoint> points;

    static AccuracySeries from_points(std::vector<AccuracyPoint> points);
    /// CSV: date,accuracy,n — one record per line.
    static AccuracySeries load(const std::filesystem::path& path);
};

/// BIC-style default: 2 * ln(n) * sigma^2, with sigma estimated from first
/// differences (var(diff) / 2 for i.i.d. noise around a piecewise mean).
double default_penalty(const AccuracySeries& series);

/// Binary segmentation minimizing within-segment squared deviation from the
/// segment mean; a split is accepted iff its cost reduction exceeds the
/// penalty. Returned indices mark the first point of each new segment.
std::vector<std::size_t> detect_change_points(const AccuracySeries& series,
                                              std::optional<double> penalty = std::nullopt);

struct RetrainConfig {
    std::optional<double> penalty;  // default_penalty when unset
    double drop_threshold = 0.02;   // absolute accuracy drop that triggers retraining
};

struct RetrainDecision {
    bool retrain = false;
    std::vector<std::size_t> change_points;
    double previous_mean = 0.0;  // mean of the segment before the last change point
    double recent_mean = 0.0;    // mean of the most recent segment
};

/// True iff the most recent segment's mean accuracy sits more than
/// drop_threshold below the previous segment's mean.
RetrainDecision should_retrain(const AccuracySeries& series, const RetrainConfig& config);

}  // namespace triage
