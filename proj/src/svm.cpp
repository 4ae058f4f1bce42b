// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 triage contributors

#include "triage/svm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <limits>
#include <thread>
#include <unordered_map>

#include "triage/errors.hpp"
#include "triage/rng.hpp"
#include "triage/util.hpp"

namespace triage {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct BinaryProblem {
    const std::vector<SparseVector>* x = nullptr;
    std::vector<signed char> y;       // +1 / -1
    std::vector<double> q_diag;       // ||x_i||^2 (+ bias_scale^2)
    std::size_t weight_dim = 0;       // feature dim (+1 bias column)
    std::size_t feature_dim = 0;
    double bias_scale = 0.0;          // 0 when bias disabled
};

double dot_augmented(const std::vector<double>& w, const SparseVector& x, const BinaryProblem& prob) {
    double acc = 0.0;
    for (const auto& [idx, value] : x.entries) acc += w[idx] * value;
    if (prob.bias_scale != 0.0) acc += w[prob.feature_dim] * prob.bias_scale;
    return acc;
}

double primal_objective(const std::vector<double>& w, const BinaryProblem& prob, double c) {
    double wtw = 0.0;
    for (double v : w) wtw += v * v;
    double hinge = 0.0;
    for (std::size_t i = 0; i < prob.x->size(); ++i) {
        const double margin = 1.0 - prob.y[i] * dot_augmented(w, (*prob.x)[i], prob);
        if (margin > 0.0) hinge += margin;
    }
    return 0.5 * wtw + c * hinge;
}

double dual_objective(const std::vector<double>& w, const std::vector<double>& alpha) {
    double wtw = 0.0;
    for (double v : w) wtw += v * v;
    double sum = 0.0;
    for (double a : alpha) sum += a;
    return sum - 0.5 * wtw;
}

struct BinarySolution {
    std::vector<double> w;
    ClassTrainInfo info;
};

// Dual coordinate descent for L2-regularized L1-loss SVM (the algorithm
// behind liblinear's solver): random permutation per pass, projected
// gradient stopping rule, and active-set shrinking with a full re-check
// before declaring convergence. A closing read-only pass records the exact
// maximal KKT violation; if it still exceeds tol and pass budget remains,
// optimization resumes.
BinarySolution solve_binary(const BinaryProblem& prob, const TrainConfig& cfg, std::uint64_t seed,
                            std::vector<std::pair<double, double>>* objective_trace,
                            double* trace_min_alpha, double* trace_max_alpha) {
    const std::size_t n = prob.x->size();
    const double c = cfg.c;

    std::vector<double> alpha(n, 0.0);
    std::vector<double> w(prob.weight_dim, 0.0);
    std::vector<std::size_t> active(n);
    for (std::size_t i = 0; i < n; ++i) active[i] = i;

    Rng rng(seed);
    ClassTrainInfo info;
    double traced_min = kInf, traced_max = -kInf;

    auto gradient = [&](std::size_t i) {
        return prob.y[i] * dot_augmented(w, (*prob.x)[i], prob) - 1.0;
    };

    auto apply_update = [&](std::size_t i, double delta) {
        const double d = delta * prob.y[i];
        for (const auto& [idx, value] : (*prob.x)[i].entries) w[idx] += d * value;
        if (prob.bias_scale != 0.0) w[prob.feature_dim] += d * prob.bias_scale;
    };

    auto max_violation_full = [&] {
        double violation = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double g = gradient(i);
            double pg = g;
            if (alpha[i] <= 0.0) {
                pg = std::min(g, 0.0);
            } else if (alpha[i] >= c) {
                pg = std::max(g, 0.0);
            }
            violation = std::max(violation, std::abs(pg));
        }
        return violation;
    };

    int passes = 0;
    bool satisfied = false;
    // The inner stopping rule measures pre-update gradients, so the exact
    // KKT violation at the final alphas can land slightly above tol; each
    // resume halves the working epsilon until the closing check passes.
    double eps_working = cfg.tol;
    while (passes < cfg.max_iter && !satisfied) {
        std::size_t active_size = n;
        double pg_max_old = kInf;
        double pg_min_old = -kInf;
        bool inner_converged = false;

        while (passes < cfg.max_iter) {
            ++passes;
            double pg_max_new = -kInf;
            double pg_min_new = kInf;

            rng.shuffle_prefix(active, active_size);

            std::size_t s = 0;
            while (s < active_size) {
                const std::size_t i = active[s];
                const double g = gradient(i);
                double pg = 0.0;

                if (alpha[i] == 0.0) {
                    if (g > pg_max_old) {
                        std::swap(active[s], active[--active_size]);
                        continue;
                    }
                    if (g < 0.0) pg = g;
                } else if (alpha[i] == c) {
                    if (g < pg_min_old) {
                        std::swap(active[s], active[--active_size]);
                        continue;
                    }
                    if (g > 0.0) pg = g;
                } else {
                    pg = g;
                }

                pg_max_new = std::max(pg_max_new, pg);
                pg_min_new = std::min(pg_min_new, pg);

                if (std::abs(pg) > 1e-12) {
                    const double old = alpha[i];
                    alpha[i] = std::min(std::max(alpha[i] - g / prob.q_diag[i], 0.0), c);
                    apply_update(i, alpha[i] - old);
                }
                ++s;
            }

            if (objective_trace) {
                objective_trace->emplace_back(primal_objective(w, prob, c), dual_objective(w, alpha));
                for (double a : alpha) {
                    traced_min = std::min(traced_min, a);
                    traced_max = std::max(traced_max, a);
                }
            }

            if (pg_max_new - pg_min_new <= eps_working) {
                if (active_size == n) {
                    inner_converged = true;
                    break;
                }
                // Criterion met on the shrunken set: re-check everything.
                active_size = n;
                pg_max_old = kInf;
                pg_min_old = -kInf;
                continue;
            }

            pg_max_old = pg_max_new <= 0.0 ? kInf : pg_max_new;
            pg_min_old = pg_min_new >= 0.0 ? -kInf : pg_min_new;
        }

        (void)inner_converged;
        info.final_violation = max_violation_full();
        satisfied = info.final_violation <= cfg.tol;
        info.converged = satisfied;
        if (!satisfied) eps_working *= 0.5;
    }

    info.passes = passes;
    if (trace_min_alpha) *trace_min_alpha = traced_min;
    if (trace_max_alpha) *trace_max_alpha = traced_max;

    BinarySolution solution;
    solution.w = std::move(w);
    solution.info = info;
    return solution;
}

std::uint64_t hash_training_data(const std::vector<SparseVector>& vectors,
                               const std::vector<std::string>& labels) {
    std::uint64_t h = fnv1a64("svm-data-v1");
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        h = fnv1a64(labels[i], h);
        for (const auto& [idx, value] : vectors[i].entries) {
            h = fnv1a64(std::to_string(idx), h);
            char buf[sizeof(double)];
            std::memcpy(buf, &value, sizeof(double));
            h = fnv1a64(std::string_view(buf, sizeof(double)), h);
        }
        h = fnv1a64(";", h);
    }
    return h;
}

}  // namespace

std::uint64_t TrainConfig::fingerprint() const {
    std::uint64_t h = fnv1a64("train-v1");
    h = fnv1a64(std::to_string(c), h);
    h = fnv1a64(std::to_string(tol), h);
    h = fnv1a64(std::to_string(max_iter), h);
    h = fnv1a64(std::to_string(seed), h);
    h = fnv1a64(fit_bias ? "b1" : "b0", h);
    h = fnv1a64(std::to_string(bias_scale), h);
    return h;
}

void TrainConfig::validate() const {
    if (c <= 0.0) throw InvalidConfig("c must be > 0");
    if (tol <= 0.0) throw InvalidConfig("tol must be > 0");
    if (max_iter < 1) throw InvalidConfig("max_iter must be >= 1");
    if (fit_bias && bias_scale <= 0.0) throw InvalidConfig("bias_scale must be > 0 when fitting a bias");
}

LinearModel LinearModel::train(const std::vector<SparseVector>& vectors,
                               const std::vector<std::string>& labels, const TrainConfig& config,
                               TrainTrace* trace) {
    config.validate();
    if (vectors.size() != labels.size())
        throw LengthMismatch("vectors and labels must have equal length");

    LinearModel model;
    model.config_ = config;
    model.fit_bias_ = config.fit_bias;
    model.bias_scale_ = config.fit_bias ? config.bias_scale : 0.0;
    model.data_fingerprint_ = hash_training_data(vectors, labels);

    std::vector<std::string> classes(labels.begin(), labels.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    if (classes.size() < 2) throw SingleClass();
    model.classes_ = std::move(classes);

    const std::size_t dim = vectors.empty() ? 0 : vectors.front().dim;
    for (const auto& v : vectors) {
        if (v.dim != dim) throw DimensionMismatch(dim, v.dim);
    }
    model.feature_dim_ = dim;

    BinaryProblem base;
    base.x = &vectors;
    base.feature_dim = dim;
    base.bias_scale = config.fit_bias ? config.bias_scale : 0.0;
    base.weight_dim = dim + (config.fit_bias ? 1 : 0);
    base.q_diag.resize(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        double sq = base.bias_scale * base.bias_scale;
        for (const auto& [idx, value] : vectors[i].entries) sq += value * value;
        base.q_diag[i] = sq;
    }

    const std::size_t n_classes = model.classes_.size();
    model.weights_.resize(n_classes);
    model.biases_.assign(n_classes, 0.0);
    model.info_.resize(n_classes);
    if (trace) {
        trace->objectives.resize(n_classes);
        trace->min_alpha.assign(n_classes, 0.0);
        trace->max_alpha.assign(n_classes, 0.0);
    }

    std::unordered_map<std::string, std::size_t> class_index;
    for (std::size_t k = 0; k < n_classes; ++k) class_index.emplace(model.classes_[k], k);
    std::vector<std::size_t> label_index(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) label_index[i] = class_index.at(labels[i]);

    auto train_class = [&](std::size_t k) {
        BinaryProblem prob = base;
        prob.y.resize(vectors.size());
        for (std::size_t i = 0; i < vectors.size(); ++i)
            prob.y[i] = label_index[i] == k ? static_cast<signed char>(1) : static_cast<signed char>(-1);

        auto solution = solve_binary(prob, config, mix_seed(config.seed, k),
                                     trace ? &trace->objectives[k] : nullptr,
                                     trace ? &trace->min_alpha[k] : nullptr,
                                     trace ? &trace->max_alpha[k] : nullptr);
        if (config.fit_bias) {
            model.biases_[k] = solution.w[dim] * config.bias_scale;
            solution.w.resize(dim);
        }
        model.weights_[k] = std::move(solution.w);
        model.info_[k] = solution.info;
    };

    const int threads = std::max(1, config.threads);
    if (threads == 1 || n_classes <= 1) {
        for (std::size_t k = 0; k < n_classes; ++k) train_class(k);
    } else {
        // Per-class problems are independent and seeded independently, so
        // the result does not depend on the schedule.
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const int workers = std::min<int>(threads, static_cast<int>(n_classes));
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t k = next.fetch_add(1);
                    if (k >= n_classes) return;
                    train_class(k);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    return model;
}

std::vector<double> LinearModel::decision_scores(const SparseVector& x) const {
    if (x.dim != feature_dim_) throw DimensionMismatch(feature_dim_, x.dim);
    std::vector<double> scores(classes_.size());
    for (std::size_t k = 0; k < classes_.size(); ++k)
        scores[k] = x.dot_dense(weights_[k]) + biases_[k];
    return scores;
}

std::size_t LinearModel::predict_index(const SparseVector& x) const {
    const auto scores = decision_scores(x);
    std::size_t best = 0;
    for (std::size_t k = 1; k < scores.size(); ++k) {
        if (scores[k] > scores[best]) best = k;  // ties keep the earlier class
    }
    return best;
}

std::string LinearModel::predict(const SparseVector& x) const { return classes_[predict_index(x)]; }

double LinearModel::bias_of(std::size_t class_idx) const { return biases_[class_idx]; }

nlohmann::json LinearModel::to_json() const {
    nlohmann::json j{{"format_version", 1},
                     {"classes", classes_},
                     {"feature_dim", feature_dim_},
                     {"fit_bias", fit_bias_},
                     {"bias_scale", bias_scale_},
                     {"biases", biases_},
                     {"weights", weights_},
                     {"data_fingerprint", to_hex(data_fingerprint_)},
                     {"config",
                      {{"c", config_.c},
                       {"tol", config_.tol},
                       {"max_iter", config_.max_iter},
                       {"seed", config_.seed},
                       {"fit_bias", config_.fit_bias},
                       {"bias_scale", config_.bias_scale}}}};
    nlohmann::json info = nlohmann::json::array();
    for (const auto& ci : info_)
        info.push_back({{"passes", ci.passes}, {"converged", ci.converged}, {"final_violation", ci.final_violation}});
    j["train_info"] = info;
    return j;
}

LinearModel LinearModel::from_json(const nlohmann::json& j) {
    if (j.value("format_version", 0) != 1) throw InvalidConfig("unsupported linear model artifact version");
    LinearModel m;
    m.classes_ = j.at("classes").get<std::vector<std::string>>();
    m.feature_dim_ = j.at("feature_dim").get<std::size_t>();
    m.fit_bias_ = j.at("fit_bias").get<bool>();
    m.bias_scale_ = j.at("bias_scale").get<double>();
    m.biases_ = j.at("biases").get<std::vector<double>>();
    m.weights_ = j.at("weights").get<std::vector<std::vector<double>>>();
    if (m.weights_.size() != m.classes_.size() || m.biases_.size() != m.classes_.size())
        throw InvalidConfig("linear model artifact: class/weight count mismatch");
    const auto& cfg = j.at("config");
    m.config_.c = cfg.at("c").get<double>();
    m.config_.tol = cfg.at("tol").get<double>();
    m.config_.max_iter = cfg.at("max_iter").get<int>();
    m.config_.seed = cfg.at("seed").get<std::uint64_t>();
    m.config_.fit_bias = cfg.at("fit_bias").get<bool>();
    m.config_.bias_scale = cfg.at("bias_scale").get<double>();
    if (j.contains("data_fingerprint"))
        m.data_fingerprint_ = std::stoull(j.at("data_fingerprint").get<std::string>(), nullptr, 16);
    if (j.contains("train_info")) {
        for (const auto& ci : j.at("train_info")) {
            ClassTrainInfo info;
            info.passes = ci.value("passes", 0);
            info.converged = ci.value("converged", false);
            info.final_violation = ci.value("final_violation", 0.0);
            m.info_.push_back(info);
        }
    }
    return m;
}

}  // namespace triage
