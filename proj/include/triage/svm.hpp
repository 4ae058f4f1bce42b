// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 triage contributors

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "triage/vectorizer.hpp"

namespace triage {

/// Solver settings for the one-vs-rest linear SVM. Defaults mirror the
/// common library defaults: C = 1, tol = 1e-4, bias via an augmented
/// constant feature.
struct TrainConfig {
    double c = 1.0;
    double tol = 1e-4;
    int max_iter = 1000;
    std::uint64_t seed = 0;
    bool fit_bias = true;
    double bias_scale = 1.0;
    int threads = 1;

    std::uint64_t fingerprint() const;
    void validate() const;
};

struct ClassTrainInfo {
    int passes = 0;
    bool converged = false;
    double final_violation = 0.0;  // max |projected gradient| on a closing full pass
};

/// Test hook: per-class, per-pass (primal, dual) objective values plus the
/// dual-variable bounds observed while training. Populating it is O(n) per
/// pass, so only small instances should ask for it.
struct TrainTrace {
    std::vector<std::vector<std::pair<double, double>>> objectives;
    std::vector<double> min_alpha;
    std::vector<double> max_alpha;
};

/// One-vs-rest linear model over sparse tf-idf vectors. Classes are sorted
/// lexicographically; score ties resolve toward the earlier class. Weight
/// vectors carry the bias as a trailing column when fit_bias is set.
class LinearModel {
public:
    LinearModel() = default;

    /// L1-loss dual coordinate descent, one binary problem per class with
    /// +/-1 labels, random permutation per pass and active-set shrinking.
    /// Per-class passes are seeded from (config.seed, class index) so
    /// parallel training is schedule-independent.
    static LinearModel train(const std::vector<SparseVector>& vectors,
                             const std::vector<std::string>& labels, const TrainConfig& config,
                             TrainTrace* trace = nullptr);

    std::vector<double> decision_scores(const SparseVector& x) const;
    std::string predict(const SparseVector& x) const;
    std::size_t predict_index(const SparseVector& x) const;

    const std::vector<std::string>& classes() const { return classes_; }
    std::size_t feature_dim() const { return feature_dim_; }
    bool has_bias() const { return fit_bias_; }
    double bias_of(std::size_t class_idx) const;
    /// Per-class weights over features only (bias excluded).
    const std::vector<double>& weights_of(std::size_t class_idx) const { return weights_[class_idx]; }
    const std::vector<ClassTrainInfo>& train_info() const { return info_; }
    const TrainConfig& config() const { return config_; }
    std::uint64_t data_fingerprint() const { return data_fingerprint_; }

    nlohmann::json to_json() const;
    static LinearModel from_json(const nlohmann::json& j);

private:
    std::vector<std::string> classes_;
    std::vector<std::vector<double>> weights_;  // per class, dim entries
    std::vector<double> biases_;                // per class; zero when !fit_bias_
    std::size_t feature_dim_ = 0;
    bool fit_bias_ = true;
    double bias_scale_ = 1.0;
    std::vector<ClassTrainInfo> info_;
    TrainConfig config_;
    std::uint64_t data_fingerprint_ = 0;
};

}  // namespace triage
