// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 triage contributors

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "triage/corpus.hpp"
#include "triage/svm.hpp"
#include "triage/textprep.hpp"
#include "triage/vectorizer.hpp"

namespace triage {

/// The SVM family from the study:
///   TextOnly        - summary + description, single channel
///   AttachmentOnly  - screenshot text, single channel
///   MergedMulti     - both sources merged into one channel
///   TwoChannelMulti - per-channel tf-idf, vectors concatenated
///   Hybrid          - TwoChannelMulti for reports with screenshots,
///                     TextOnly otherwise
enum class ModelKind { TextOnly, AttachmentOnly, MergedMulti, TwoChannelMulti, Hybrid };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct ModelConfig {
    PrepConfig prep;
    TrainConfig train;
    int min_df = 1;
};

struct Explanation {
    std::string term;
    std::string channel;  // "report", "attachment" or "merged"
    double contribution;  // weight * feature value for the predicted class
};

struct AssignmentResult {
    std::string team;
    std::vector<std::string> classes;  // order of `scores`
    std::vector<double> scores;
    std::vector<Explanation> explanation;
    std::string routed_to;  // kind that produced the scores
};

/// Builds the channel term lists a kind consumes. Index 0 is the report
/// channel (or the merged channel); TwoChannelMulti adds the attachment
/// channel at index 1.
std::vector<std::vector<std::string>> assemble(const IssueReport& report, ModelKind kind,
                                               const std::string& attachment_text,
                                               const PrepConfig& prep);

/// Canonical JSON shape for one assignment: {team, scores (top-k by score),
/// explanation, routed_to}. Batch predict and the HTTP service both emit
/// this, which is what makes them bit-comparable.
nlohmann::json assignment_result_to_json(const AssignmentResult& result, int top_k);

/// A trained assignment model. Immutable after training; assign/explain are
/// const and freely concurrent.
class AssignmentModel {
public:
    AssignmentModel() = default;

    /// ocr_texts maps report id -> concatenated screenshot text (from
    /// ocr::extract_all). Hybrid trains both sub-models on the full set;
    /// routing only happens at prediction time.
    static AssignmentModel train(const Dataset& train_set, ModelKind kind, const ModelConfig& config,
                                 const std::map<std::string, std::string>& ocr_texts);

    AssignmentResult assign(const IssueReport& report, const std::string& attachment_text,
                            int explain_k = 5) const;

    ModelKind kind() const { return kind_; }
    const std::vector<std::string>& classes() const;
    const LinearModel& linear() const { return *linear_; }
    const AssignmentModel& sub_model(ModelKind kind) const;  // Hybrid only

    void save(const std::filesystem::path& bundle_dir, std::uint64_t corpus_fingerprint = 0) const;
    static AssignmentModel load(const std::filesystem::path& bundle_dir);

    std::uint64_t fingerprint() const;

private:
    SparseVector vectorize(const std::vector<std::vector<std::string>>& channels) const;

    ModelKind kind_ = ModelKind::TextOnly;
    ModelConfig config_;
    std::optional<TfIdfModel> tfidf_;          // TextOnly / AttachmentOnly / MergedMulti
    std::optional<TwoChannelModel> two_channel_;  // TwoChannelMulti
    std::optional<LinearModel> linear_;
    std::shared_ptr<AssignmentModel> hybrid_text_;   // Hybrid sub-models
    std::shared_ptr<AssignmentModel> hybrid_multi_;
};

}  // namespace triage
