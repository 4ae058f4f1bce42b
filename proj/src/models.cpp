// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 triage contributors

#include "triage/models.hpp"

#include <algorithm>

#include "triage/errors.hpp"
#include "triage/util.hpp"

namespace triage {

namespace {

std::string report_text(const IssueReport& report) {
    // Separator keeps the summary/description token boundary intact.
    return report.summary + "\n" + report.description;
}

const std::string& ocr_text_for(const std::map<std::string, std::string>& ocr_texts,
                                const std::string& report_id) {
    static const std::string kEmpty;
    auto it = ocr_texts.find(report_id);
    return it == ocr_texts.end() ? kEmpty : it->second;
}

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::TextOnly: return "text-only";
        case ModelKind::AttachmentOnly: return "attachment-only";
        case ModelKind::MergedMulti: return "merged-multi";
        case ModelKind::TwoChannelMulti: return "two-channel-multi";
        case ModelKind::Hybrid: return "hybrid";
    }
    return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "text-only") return ModelKind::TextOnly;
    if (name == "attachment-only") return ModelKind::AttachmentOnly;
    if (name == "merged-multi") return ModelKind::MergedMulti;
    if (name == "two-channel-multi") return ModelKind::TwoChannelMulti;
    if (name == "hybrid") return ModelKind::Hybrid;
    throw InvalidConfig("unknown model kind '" + name + "'");
}

nlohmann::json assignment_result_to_json(const AssignmentResult& result, int top_k) {
    std::vector<std::size_t> order(result.scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return result.scores[a] > result.scores[b];
    });
    if (order.size() > static_cast<std::size_t>(top_k)) order.resize(static_cast<std::size_t>(top_k));

    nlohmann::json scores = nlohmann::json::array();
    for (const auto i : order)
        scores.push_back({{"team", result.classes[i]}, {"score", result.scores[i]}});

    nlohmann::json explanation = nlohmann::json::array();
    for (const auto& e : result.explanation)
        explanation.push_back(
            {{"term", e.term}, {"channel", e.channel}, {"contribution", e.contribution}});

    return nlohmann::json{{"team", result.team},
                          {"scores", scores},
                          {"explanation", explanation},
                          {"routed_to", result.routed_to}};
}

std::vector<std::vector<std::string>> assemble(const IssueReport& report, ModelKind kind,
                                               const std::string& attachment_text,
                                               const PrepConfig& prep) {
    switch (kind) {
        case ModelKind::TextOnly:
            return {prepare(report_text(report), prep)};
        case ModelKind::AttachmentOnly:
            return {prepare(attachment_text, prep)};
        case ModelKind::MergedMulti:
            return {prepare(report_text(report) + "\n" + attachment_text, prep)};
        case ModelKind::TwoChannelMulti:
            return {prepare(report_text(report), prep), prepare(attachment_text, prep)};
        case ModelKind::Hybrid:
            throw InvalidConfig("assemble is defined on concrete kinds; route the hybrid first");
    }
    throw InvalidConfig("unknown model kind");
}

AssignmentModel AssignmentModel::train(const Dataset& train_set, ModelKind kind,
                                       const ModelConfig& config,
                                       const std::map<std::string, std::string>& ocr_texts) {
    if (train_set.reports.empty()) throw EmptyCorpus("training set is empty");
    config.prep.validate();
    config.train.validate();

    AssignmentModel model;
    model.kind_ = kind;
    model.config_ = config;

    if (kind == ModelKind::Hybrid) {
        model.hybrid_multi_ = std::make_shared<AssignmentModel>(
            train(train_set, ModelKind::TwoChannelMulti, config, ocr_texts));
        model.hybrid_text_ = std::make_shared<AssignmentModel>(
            train(train_set, ModelKind::TextOnly, config, ocr_texts));
        return model;
    }

    std::vector<std::string> labels;
    labels.reserve(train_set.reports.size());
    std::vector<SparseVector> vectors;
    vectors.reserve(train_set.reports.size());

    if (kind == ModelKind::TwoChannelMulti) {
        std::vector<std::vector<std::string>> report_docs, attachment_docs;
        report_docs.reserve(train_set.reports.size());
        attachment_docs.reserve(train_set.reports.size());
        for (const auto& report : train_set.reports) {
            auto channels = assemble(report, kind, ocr_text_for(ocr_texts, report.id), config.prep);
            report_docs.push_back(std::move(channels[0]));
            attachment_docs.push_back(std::move(channels[1]));
            labels.push_back(report.assignee);
        }
        model.two_channel_ = TwoChannelModel::fit(report_docs, attachment_docs, config.min_df);
        for (std::size_t i = 0; i < report_docs.size(); ++i)
            vectors.push_back(model.two_channel_->transform(report_docs[i], attachment_docs[i]));
    } else {
        std::vector<std::vector<std::string>> docs;
        docs.reserve(train_set.reports.size());
        for (const auto& report : train_set.reports) {
            auto channels = assemble(report, kind, ocr_text_for(ocr_texts, report.id), config.prep);
            docs.push_back(std::move(channels[0]));
            labels.push_back(report.assignee);
        }
        model.tfidf_ = TfIdfModel::fit(docs, config.min_df);
        for (const auto& doc : docs) vectors.push_back(model.tfidf_->transform(doc));
    }

    model.linear_ = LinearModel::train(vectors, labels, config.train);
    return model;
}

SparseVector AssignmentModel::vectorize(const std::vector<std::vector<std::string>>& channels) const {
    if (kind_ == ModelKind::TwoChannelMulti) return two_channel_->transform(channels[0], channels[1]);
    return tfidf_->transform(channels[0]);
}

AssignmentResult AssignmentModel::assign(const IssueReport& report,
                                         const std::string& attachment_text, int explain_k) const {
    if (kind_ == ModelKind::Hybrid) {
        // Routing keys on attachment presence, not on whether OCR found text.
        const AssignmentModel& routed = report.has_screenshot() ? *hybrid_multi_ : *hybrid_text_;
        return routed.assign(report, attachment_text, explain_k);
    }

    const auto channels = assemble(report, kind_, attachment_text, config_.prep);
    const SparseVector x = vectorize(channels);
    const auto scores = linear_->decision_scores(x);
    const std::size_t best = linear_->predict_index(x);

    AssignmentResult result;
    result.team = linear_->classes()[best];
    result.classes = linear_->classes();
    result.scores = scores;
    result.routed_to = to_string(kind_);

    if (explain_k > 0) {
        const auto& weights = linear_->weights_of(best);
        const std::size_t report_dim =
            kind_ == ModelKind::TwoChannelMulti ? two_channel_->report_channel().dim() : 0;
        std::vector<Explanation> contributions;
        contributions.reserve(x.entries.size());
        for (const auto& [idx, value] : x.entries) {
            Explanation e;
            if (kind_ == ModelKind::TwoChannelMulti) {
                if (idx < report_dim) {
                    e.term = two_channel_->report_channel().terms()[idx];
                    e.channel = "report";
                } else {
                    e.term = two_channel_->attachment_channel().terms()[idx - report_dim];
                    e.channel = "attachment";
                }
            } else {
                e.term = tfidf_->terms()[idx];
                e.channel = kind_ == ModelKind::AttachmentOnly ? "attachment"
                            : kind_ == ModelKind::MergedMulti  ? "merged"
                                                               : "report";
            }
            e.contribution = weights[idx] * value;
            contributions.push_back(std::move(e));
        }
        std::stable_sort(contributions.begin(), contributions.end(),
                         [](const Explanation& a, const Explanation& b) {
                             return a.contribution > b.contribution;
                         });
        if (contributions.size() > static_cast<std::size_t>(explain_k))
            contributions.resize(static_cast<std::size_t>(explain_k));
        result.explanation = std::move(contributions);
    }
    return result;
}

const std::vector<std::string>& AssignmentModel::classes() const {
    if (kind_ == ModelKind::Hybrid) return hybrid_multi_->classes();
    return linear_->classes();
}

const AssignmentModel& AssignmentModel::sub_model(ModelKind kind) const {
    if (kind_ != ModelKind::Hybrid) throw InvalidConfig("sub_model is only defined on hybrid models");
    if (kind == ModelKind::TextOnly) return *hybrid_text_;
    if (kind == ModelKind::TwoChannelMulti) return *hybrid_multi_;
    throw InvalidConfig("hybrid has no '" + to_string(kind) + "' sub-model");
}

namespace {

nlohmann::json prep_to_json(const PrepConfig& prep) {
    return nlohmann::json{{"ngram_max", prep.ngram_max},
                          {"min_token_len", prep.min_token_len},
                          {"stopwords", std::vector<std::string>(prep.stopwords.begin(), prep.stopwords.end())},
                          {"fingerprint", to_hex(prep.fingerprint())}};
}

PrepConfig prep_from_json(const nlohmann::json& j) {
    PrepConfig prep;
    prep.ngram_max = j.at("ngram_max").get<int>();
    prep.min_token_len = j.at("min_token_len").get<int>();
    const auto words = j.at("stopwords").get<std::vector<std::string>>();
    prep.stopwords.insert(words.begin(), words.end());
    return prep;
}

}  // namespace

void AssignmentModel::save(const std::filesystem::path& dir, std::uint64_t corpus_fingerprint) const {
    std::filesystem::create_directories(dir);

    nlohmann::json manifest{{"format_version", 1},
                            {"kind", to_string(kind_)},
                            {"created_at", format_rfc3339(current_epoch_seconds())},
                            {"corpus_fingerprint", to_hex(corpus_fingerprint)},
                            {"prep", prep_to_json(config_.prep)},
                            {"min_df", config_.min_df}};

    if (kind_ == ModelKind::Hybrid) {
        hybrid_text_->save(dir / "text", corpus_fingerprint);
        hybrid_multi_->save(dir / "multi", corpus_fingerprint);
        manifest["components"] = {{"text", "text/"}, {"multi", "multi/"}};
        write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
        return;
    }

    const std::string vectorizer_payload =
        (kind_ == ModelKind::TwoChannelMulti ? two_channel_->to_json() : tfidf_->to_json()).dump();
    const std::string linear_payload = linear_->to_json().dump();
    write_file_atomic(dir / "vectorizer.json", vectorizer_payload + "\n");
    write_file_atomic(dir / "linear.json", linear_payload + "\n");
    manifest["components"] = {{"vectorizer", to_hex(fnv1a64(vectorizer_payload))},
                              {"linear", to_hex(fnv1a64(linear_payload))}};
    write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

AssignmentModel AssignmentModel::load(const std::filesystem::path& dir) {
    const auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
    if (manifest.value("format_version", 0) != 1)
        throw InvalidConfig("unsupported bundle version in " + dir.string());

    AssignmentModel model;
    model.kind_ = model_kind_from_string(manifest.at("kind").get<std::string>());
    model.config_.prep = prep_from_json(manifest.at("prep"));
    model.config_.min_df = manifest.value("min_df", 1);

    if (model.kind_ == ModelKind::Hybrid) {
        model.hybrid_text_ = std::make_shared<AssignmentModel>(load(dir / "text"));
        model.hybrid_multi_ = std::make_shared<AssignmentModel>(load(dir / "multi"));
        if (model.hybrid_text_->kind_ != ModelKind::TextOnly ||
            model.hybrid_multi_->kind_ != ModelKind::TwoChannelMulti)
            throw InvalidConfig("hybrid bundle has mismatched sub-model kinds");
        return model;
    }

    const auto vectorizer_json = nlohmann::json::parse(read_file(dir / "vectorizer.json"));
    if (model.kind_ == ModelKind::TwoChannelMulti) {
        model.two_channel_ = TwoChannelModel::from_json(vectorizer_json);
    } else {
        model.tfidf_ = TfIdfModel::from_json(vectorizer_json);
    }
    model.linear_ = LinearModel::from_json(nlohmann::json::parse(read_file(dir / "linear.json")));
    model.config_.train = model.linear_->config();

    const std::size_t expected_dim =
        model.kind_ == ModelKind::TwoChannelMulti ? model.two_channel_->dim() : model.tfidf_->dim();
    if (model.linear_->feature_dim() != expected_dim)
        throw DimensionMismatch(expected_dim, model.linear_->feature_dim());
    return model;
}

std::uint64_t AssignmentModel::fingerprint() const {
    std::uint64_t h = fnv1a64("bundle-v1");
    h = fnv1a64(to_string(kind_), h);
    if (kind_ == ModelKind::Hybrid) {
        h = fnv1a64(to_hex(hybrid_text_->fingerprint()), h);
        h = fnv1a64(to_hex(hybrid_multi_->fingerprint()), h);
        return h;
    }
    h = fnv1a64(to_hex(linear_->data_fingerprint()), h);
    h = fnv1a64(std::to_string(linear_->feature_dim()), h);
    for (const auto& c : linear_->classes()) h = fnv1a64(c, h);
    return h;
}

}  // namespace triage
