// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 triage contributors

#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace triage {

/// Sorted-index sparse vector. Entries hold finite, non-zero values; a
/// freshly transformed document is either all-zero or unit L2 norm.
struct SparseVector {
    std::size_t dim = 0;
    std::vector<std::pair<std::uint32_t, double>> entries;

    double norm() const;
    double dot_dense(const std::vector<double>& weights) const;
};

/// Per-channel tf-idf statistics. Vocabulary is sorted by term so a fit is
/// byte-reproducible; idf uses the smoothed form
/// ln((1 + n_docs) / (1 + df)) + 1, which is strictly positive.
class TfIdfModel {
public:
    TfIdfModel() = default;

    static TfIdfModel fit(const std::vector<std::vector<std::string>>& documents, int min_df = 1);

    /// count(term) * idf(term), L2-normalized. Out-of-vocabulary terms are
    /// ignored; an all-unknown document maps to the zero vector.
    SparseVector transform(const std::vector<std::string>& terms) const;

    std::size_t dim() const { return terms_.size(); }
    std::size_t n_docs() const { return n_docs_; }
    const std::vector<std::string>& terms() const { return terms_; }
    const std::vector<std::int64_t>& doc_freq() const { return doc_freq_; }
    const std::vector<double>& idf() const { return idf_; }
    std::int64_t doc_freq_of(const std::string& term) const;

    nlohmann::json to_json() const;
    /// Recomputes idf from (n_docs, doc_freq) and cross-checks against the
    /// stored values; a mismatch means a corrupt or tampered artifact.
    static TfIdfModel from_json(const nlohmann::json& j);

private:
    std::vector<std::string> terms_;  // sorted
    std::unordered_map<std::string, std::uint32_t> index_;
    std::vector<std::int64_t> doc_freq_;
    std::vector<double> idf_;
    std::size_t n_docs_ = 0;
    int min_df_ = 1;
};

/// Report-text and attachment-text channels fitted independently; transforms
/// concatenate the two unit-norm blocks without renormalizing, so each
/// channel keeps equal influence regardless of document lengths.
class TwoChannelModel {
public:
    TwoChannelModel() = default;

    static TwoChannelModel fit(const std::vector<std::vector<std::string>>& report_docs,
                               const std::vector<std::vector<std::string>>& attachment_docs,
                               int min_df = 1);

    SparseVector transform(const std::vector<std::string>& report_terms,
                           const std::vector<std::string>& attachment_terms) const;

    std::size_t dim() const { return report_.dim() + attachment_.dim(); }
    const TfIdfModel& report_channel() const { return report_; }
    const TfIdfModel& attachment_channel() const { return attachment_; }

    nlohmann::json to_json() const;
    static TwoChannelModel from_json(const nlohmann::json& j);

private:
    TfIdfModel report_;
    TfIdfModel attachment_;
};

}  // namespace triage
