// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 triage contributors

#include "triage/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "triage/errors.hpp"
#include "triage/util.hpp"

namespace triage {

AccuracySeries AccuracySeries::from_points(std::vector<AccuracyPoint> points) {
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].accuracy < 0.0 || points[i].accuracy > 1.0)
            throw Error("accuracy out of [0, 1] at point " + std::to_string(i));
        if (i > 0 && points[i].date <= points[i - 1].date)
            throw Error("dates must be strictly increasing (point " + std::to_string(i) + ")");
    }
    AccuracySeries series;
    series.points = std::move(points);
    return series;
}

AccuracySeries AccuracySeries::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open series file: " + path.string());
    std::vector<AccuracyPoint> points;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::string date_str, acc_str, n_str;
        if (!std::getline(row, date_str, ',') || !std::getline(row, acc_str, ',') ||
            !std::getline(row, n_str))
            throw Error("line " + std::to_string(line_no) + ": expected date,accuracy,n");
        const auto date = parse_date(date_str);
        if (!date) throw Error("line " + std::to_string(line_no) + ": bad date '" + date_str + "'");
        AccuracyPoint point;
        point.date = *date;
        point.accuracy = std::stod(acc_str);
        point.n_assignments = std::stoll(n_str);
        points.push_back(point);
    }
    return from_points(std::move(points));
}

namespace {

struct PrefixSums {
    std::vector<double> sum;
    std::vector<double> sum_sq;

    explicit PrefixSums(const std::vector<AccuracyPoint>& points)
        : sum(points.size() + 1, 0.0), sum_sq(points.size() + 1, 0.0) {
        for (std::size_t i = 0; i < points.size(); ++i) {
            sum[i + 1] = sum[i] + points[i].accuracy;
            sum_sq[i + 1] = sum_sq[i] + points[i].accuracy * points[i].accuracy;
        }
    }

    // within-segment squared deviation from the segment mean, over [lo, hi)
    double cost(std::size_t lo, std::size_t hi) const {
        const auto len = static_cast<double>(hi - lo);
        if (len <= 0.0) return 0.0;
        const double s = sum[hi] - sum[lo];
        return (sum_sq[hi] - sum_sq[lo]) - s * s / len;
    }

    double mean(std::size_t lo, std::size_t hi) const {
        return (sum[hi] - sum[lo]) / static_cast<double>(hi - lo);
    }
};

// floor below which a cost reduction is prefix-sum rounding noise
constexpr double kMinReduction = 1e-12;

void segment(const PrefixSums& sums, std::size_t lo, std::size_t hi, double penalty,
             std::vector<std::size_t>& out) {
    if (hi - lo < 2) return;
    const double whole = sums.cost(lo, hi);
    double best_reduction = 0.0;
    std::size_t best_split = 0;
    for (std::size_t m = lo + 1; m < hi; ++m) {
        const double reduction = whole - sums.cost(lo, m) - sums.cost(m, hi);
        if (reduction > best_reduction) {
            best_reduction = reduction;
            best_split = m;
        }
    }
    if (best_split == 0 || best_reduction <= penalty || best_reduction <= kMinReduction) return;
    segment(sums, lo, best_split, penalty, out);
    out.push_back(best_split);
    segment(sums, best_split, hi, penalty, out);
}

}  // namespace

double default_penalty(const AccuracySeries& series) {
    const auto& points = series.points;
    if (points.size() < 2) return 0.0;
    // sigma^2 from first differences: var(x[i+1] - x[i]) = 2 sigma^2
    double acc = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        const double d = points[i].accuracy - points[i - 1].accuracy;
        acc += d * d;
    }
    const double sigma_sq = acc / (2.0 * static_cast<double>(points.size() - 1));
    return 2.0 * std::log(static_cast<double>(points.size())) * sigma_sq;
}

std::vector<std::size_t> detect_change_points(const AccuracySeries& series,
                                              std::optional<double> penalty) {
    if (series.points.size() < 4) throw SeriesTooShort();
    const double pen = penalty.value_or(default_penalty(series));
    PrefixSums sums(series.points);
    std::vector<std::size_t> out;
    segment(sums, 0, series.points.size(), pen, out);
    std::sort(out.begin(), out.end());
    return out;
}

RetrainDecision should_retrain(const AccuracySeries& series, const RetrainConfig& config) {
    RetrainDecision decision;
    decision.change_points = detect_change_points(series, config.penalty);
    if (decision.change_points.empty()) return decision;

    const std::size_t last = decision.change_points.back();
    const std::size_t prev_lo =
        decision.change_points.size() > 1 ? decision.change_points[decision.change_points.size() - 2]
                                          : 0;
    PrefixSums sums(series.points);
    decision.previous_mean = sums.mean(prev_lo, last);
    decision.recent_mean = sums.mean(last, series.points.size());
    decision.retrain = decision.previous_mean - decision.recent_mean > config.drop_threshold;
    return decision;
}

}  // namespace triage
