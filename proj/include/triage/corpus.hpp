// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 triage contributors

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace triage {

enum class Status { Resolved, Other };
enum class AttachmentKind { Screenshot, Other };

/// Extensions treated as screenshots when a record does not declare a kind.
const std::set<std::string>& screenshot_extensions();

struct Attachment {
    std::string id;
    AttachmentKind kind = AttachmentKind::Other;
    std::optional<std::string> text;  // pre-extracted payload text
    std::optional<std::string> path;  // locator for image bytes
    std::string hash;                 // content digest; may be empty until the payload is read
};

struct IssueReport {
    std::string id;
    std::string summary;
    std::string description;
    std::string assignee;
    std::int64_t created_at = 0;  // epoch seconds, UTC
    Status status = Status::Other;
    std::vector<Attachment> attachments;

    bool has_screenshot() const;
};

/// Immutable after construction; class_list always equals the sorted set of
/// assignees present.
struct Dataset {
    std::vector<IssueReport> reports;
    std::vector<std::string> class_list;

    static Dataset from_reports(std::vector<IssueReport> reports);
    std::size_t size() const { return reports.size(); }
};

/// One JSON object per line; see README for the field list. Throws
/// SchemaViolation with the offending line number on the first malformed
/// record.
Dataset load(const std::filesystem::path& path);
void save(const Dataset& dataset, const std::filesystem::path& path);

struct ValidationIssue {
    std::size_t line = 0;
    std::string field;
    std::string message;
};

/// Non-throwing sweep that collects every problem in the file.
std::vector<ValidationIssue> validate_file(const std::filesystem::path& path);

Dataset filter_resolved(const Dataset& dataset);
Dataset temporal_sort(const Dataset& dataset);

/// train strictly before the cutoff, test at or after it.
std::pair<Dataset, Dataset> temporal_split(const Dataset& dataset, std::int64_t cutoff);

/// Deterministic shuffle split; train size is round-half-up of n * fraction.
std::pair<Dataset, Dataset> random_split(const Dataset& dataset, double train_fraction,
                                         std::uint64_t seed);

std::uint64_t dataset_fingerprint(const Dataset& dataset);

struct NoiseSpec {
    bool enabled = false;
    // Applied in order, every occurrence, so the same substring always
    // corrupts the same way (systematic OCR errors).
    std::vector<std::pair<std::string, std::string>> confusions = {
        {"l", "1"}, {"o", "0"}, {"rn", "m"}};
};

/// Parameters mirror the production corpus statistics: 68% of reports carry
/// attachments, 84.3% of those include screenshots, and report text shrinks
/// from 41 to 29 words on average when an attachment is present.
struct SynthConfig {
    int n_reports = 10000;
    int n_teams = 20;
    double p_attachment = 0.68;
    double p_screenshot_given_attachment = 0.843;
    int mean_words_with_attachment = 29;
    int mean_words_without = 41;
    double p_signal_in_attachment_only = 0.5;
    NoiseSpec ocr_noise;
    std::uint64_t seed = 1;

    void validate() const;
};

/// The token pools a synthetic corpus draws from; exposed so tests can check
/// the per-team vocabularies stay pairwise disjoint.
struct SynthVocabulary {
    std::vector<std::vector<std::string>> team_terms;
    std::vector<std::string> generic_terms;
    std::vector<std::string> boilerplate_terms;
};

SynthVocabulary synth_vocabulary(const SynthConfig& config);

/// Pure function of the config (the seed is part of it). Each team owns a
/// disjoint discriminative vocabulary; with probability
/// p_signal_in_attachment_only a report's discriminative tokens appear only
/// in its screenshot text.
Dataset generate(const SynthConfig& config);

nlohmann::json synth_config_to_json(const SynthConfig& config);
SynthConfig synth_config_from_json(const nlohmann::json& j);

}  // namespace triage
