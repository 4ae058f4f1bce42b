// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 triage contributors

#include "triage/vectorizer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string_view>

#include "triage/errors.hpp"

namespace triage {

double SparseVector::norm() const {
    double sq = 0.0;
    for (const auto& [idx, value] : entries) sq += value * value;
    return std::sqrt(sq);
}

double SparseVector::dot_dense(const std::vector<double>& weights) const {
    double acc = 0.0;
    for (const auto& [idx, value] : entries) acc += weights[idx] * value;
    return acc;
}

TfIdfModel TfIdfModel::fit(const std::vector<std::vector<std::string>>& documents, int min_df) {
    if (documents.empty()) throw EmptyCorpus();
    if (min_df < 1) throw InvalidConfig("min_df must be >= 1");

    // std::map keeps terms sorted, which fixes the column order.
    std::map<std::string, std::int64_t, std::less<>> df;
    std::set<std::string_view> uniq;
    for (const auto& doc : documents) {
        uniq.clear();
        for (const auto& term : doc) uniq.insert(term);
        for (const auto term : uniq) {
            auto it = df.find(term);
            if (it == df.end()) {
                df.emplace(std::string(term), 1);
            } else {
                ++it->second;
            }
        }
    }

    TfIdfModel model;
    model.n_docs_ = documents.size();
    model.min_df_ = min_df;
    for (const auto& [term, count] : df) {
        if (count < min_df) continue;
        model.index_.emplace(term, static_cast<std::uint32_t>(model.terms_.size()));
        model.terms_.push_back(term);
        model.doc_freq_.push_back(count);
        model.idf_.push_back(std::log((1.0 + static_cast<double>(model.n_docs_)) / (1.0 + static_cast<double>(count))) +
                             1.0);
    }
    return model;
}

SparseVector TfIdfModel::transform(const std::vector<std::string>& terms) const {
    SparseVector vec;
    vec.dim = terms_.size();

    std::map<std::uint32_t, double> counts;
    for (const auto& term : terms) {
        auto it = index_.find(term);
        if (it != index_.end()) counts[it->second] += 1.0;
    }
    if (counts.empty()) return vec;

    double sq = 0.0;
    vec.entries.reserve(counts.size());
    for (const auto& [idx, count] : counts) {
        const double value = count * idf_[idx];
        vec.entries.emplace_back(idx, value);
        sq += value * value;
    }
    const double inv_norm = 1.0 / std::sqrt(sq);
    for (auto& [idx, value] : vec.entries) value *= inv_norm;
    return vec;
}

std::int64_t TfIdfModel::doc_freq_of(const std::string& term) const {
    auto it = index_.find(term);
    return it == index_.end() ? 0 : doc_freq_[it->second];
}

nlohmann::json TfIdfModel::to_json() const {
    return nlohmann::json{{"format_version", 1},
                          {"n_docs", n_docs_},
                          {"min_df", min_df_},
                          {"terms", terms_},
                          {"doc_freq", doc_freq_},
                          {"idf", idf_}};
}

TfIdfModel TfIdfModel::from_json(const nlohmann::json& j) {
    if (j.value("format_version", 0) != 1) throw InvalidConfig("unsupported tf-idf artifact version");
    TfIdfModel model;
    model.n_docs_ = j.at("n_docs").get<std::size_t>();
    model.min_df_ = j.value("min_df", 1);
    model.terms_ = j.at("terms").get<std::vector<std::string>>();
    model.doc_freq_ = j.at("doc_freq").get<std::vector<std::int64_t>>();
    if (model.terms_.size() != model.doc_freq_.size())
        throw InvalidConfig("tf-idf artifact: terms/doc_freq size mismatch");
    const auto stored_idf = j.at("idf").get<std::vector<double>>();
    model.idf_.reserve(model.terms_.size());
    for (std::size_t i = 0; i < model.terms_.size(); ++i) {
        const double recomputed =
            std::log((1.0 + static_cast<double>(model.n_docs_)) / (1.0 + static_cast<double>(model.doc_freq_[i]))) + 1.0;
        if (i < stored_idf.size() && std::abs(stored_idf[i] - recomputed) > 1e-12)
            throw InvalidConfig("tf-idf artifact: stored idf does not match recomputation for term '" +
                                model.terms_[i] + "'");
        model.idf_.push_back(recomputed);
        model.index_.emplace(model.terms_[i], static_cast<std::uint32_t>(i));
    }
    return model;
}

TwoChannelModel TwoChannelModel::fit(const std::vector<std::vector<std::string>>& report_docs,
                                     const std::vector<std::vector<std::string>>& attachment_docs,
                                     int min_df) {
    if (report_docs.empty()) throw EmptyCorpus("report channel has no documents");
    if (report_docs.size() != attachment_docs.size())
        throw LengthMismatch("two-channel fit needs one attachment document per report document");
    TwoChannelModel model;
    model.report_ = TfIdfModel::fit(report_docs, min_df);
    model.attachment_ = TfIdfModel::fit(attachment_docs, min_df);
    return model;
}

SparseVector TwoChannelModel::transform(const std::vector<std::string>& report_terms,
                                        const std::vector<std::string>& attachment_terms) const {
    const SparseVector report_vec = report_.transform(report_terms);
    const SparseVector attachment_vec = attachment_.transform(attachment_terms);

    SparseVector out;
    out.dim = dim();
    out.entries.reserve(report_vec.entries.size() + attachment_vec.entries.size());
    out.entries = report_vec.entries;
    const auto offset = static_cast<std::uint32_t>(report_.dim());
    for (const auto& [idx, value] : attachment_vec.entries) out.entries.emplace_back(idx + offset, value);
    return out;
}

nlohmann::json TwoChannelModel::to_json() const {
    return nlohmann::json{{"format_version", 1},
                          {"report_channel", report_.to_json()},
                          {"attachment_channel", attachment_.to_json()}};
}

TwoChannelModel TwoChannelModel::from_json(const nlohmann::json& j) {
    if (j.value("format_version", 0) != 1) throw InvalidConfig("unsupported two-channel artifact version");
    TwoChannelModel model;
    model.report_ = TfIdfModel::from_json(j.at("report_channel"));
    model.attachment_ = TfIdfModel::from_json(j.at("attachment_channel"));
    return model;
}

}  // namespace triage
