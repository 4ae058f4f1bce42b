// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 triage contributors

#include "triage/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "triage/errors.hpp"
#include "triage/rng.hpp"
#include "triage/util.hpp"

namespace triage {

namespace {

std::string extension_of(const std::string& path) {
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos || dot + 1 == path.size()) return "";
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

AttachmentKind infer_kind(const nlohmann::json& j) {
    if (j.contains("kind")) {
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "screenshot") return AttachmentKind::Screenshot;
        if (kind == "other") return AttachmentKind::Other;
        throw Error("unknown attachment kind '" + kind + "'");
    }
    if (j.contains("path"))
        return screenshot_extensions().contains(extension_of(j.at("path").get<std::string>()))
                   ? AttachmentKind::Screenshot
                   : AttachmentKind::Other;
    // Inline pre-extracted text with no locator: screenshot text by default.
    return j.contains("text") ? AttachmentKind::Screenshot : AttachmentKind::Other;
}

IssueReport parse_report(const nlohmann::json& j, std::size_t line) {
    IssueReport report;
    if (!j.is_object()) throw SchemaViolation(line, "record", "expected a JSON object");

    if (!j.contains("id") || !j.at("id").is_string() || j.at("id").get<std::string>().empty())
        throw SchemaViolation(line, "id", "required non-empty string");
    report.id = j.at("id").get<std::string>();

    report.summary = j.value("summary", std::string{});
    report.description = j.value("description", std::string{});

    if (!j.contains("assignee") || !j.at("assignee").is_string() ||
        j.at("assignee").get<std::string>().empty())
        throw SchemaViolation(line, "assignee", "required non-empty string");
    report.assignee = j.at("assignee").get<std::string>();

    if (!j.contains("created_at") || !j.at("created_at").is_string())
        throw SchemaViolation(line, "created_at", "required RFC 3339 timestamp");
    const auto ts = parse_rfc3339(j.at("created_at").get<std::string>());
    if (!ts) throw SchemaViolation(line, "created_at", "not a valid RFC 3339 timestamp");
    report.created_at = *ts;

    const std::string status = j.value("status", std::string{"other"});
    if (status == "resolved") {
        report.status = Status::Resolved;
    } else if (status == "other") {
        report.status = Status::Other;
    } else {
        throw SchemaViolation(line, "status", "must be 'resolved' or 'other'");
    }

    if (j.contains("attachments")) {
        if (!j.at("attachments").is_array())
            throw SchemaViolation(line, "attachments", "must be an array");
        for (const auto& aj : j.at("attachments")) {
            Attachment att;
            if (!aj.contains("id") || !aj.at("id").is_string())
                throw SchemaViolation(line, "attachments.id", "required string");
            att.id = aj.at("id").get<std::string>();
            try {
                att.kind = infer_kind(aj);
            } catch (const Error& e) {
                throw SchemaViolation(line, "attachments.kind", e.what());
            }
            if (aj.contains("text")) att.text = aj.at("text").get<std::string>();
            if (aj.contains("path")) att.path = aj.at("path").get<std::string>();
            if (aj.contains("hash")) {
                att.hash = aj.at("hash").get<std::string>();
            } else if (att.text) {
                att.hash = to_hex(fnv1a64(*att.text));
            }
            report.attachments.push_back(std::move(att));
        }
    }
    return report;
}

nlohmann::json attachment_to_json(const Attachment& att) {
    nlohmann::json j{{"id", att.id},
                     {"kind", att.kind == AttachmentKind::Screenshot ? "screenshot" : "other"}};
    if (att.text) j["text"] = *att.text;
    if (att.path) j["path"] = *att.path;
    if (!att.hash.empty()) j["hash"] = att.hash;
    return j;
}

}  // namespace

const std::set<std::string>& screenshot_extensions() {
    static const std::set<std::string> kExtensions{"png", "jpg", "jpeg", "bmp", "gif"};
    return kExtensions;
}

bool IssueReport::has_screenshot() const {
    return std::any_of(attachments.begin(), attachments.end(),
                       [](const Attachment& a) { return a.kind == AttachmentKind::Screenshot; });
}

Dataset Dataset::from_reports(std::vector<IssueReport> reports) {
    std::unordered_set<std::string> ids;
    std::set<std::string> classes;
    for (const auto& report : reports) {
        if (report.id.empty()) throw Error("report with empty id");
        if (!ids.insert(report.id).second) throw DuplicateId(report.id);
        classes.insert(report.assignee);
    }
    Dataset dataset;
    dataset.reports = std::move(reports);
    dataset.class_list.assign(classes.begin(), classes.end());
    return dataset;
}

Dataset load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open corpus file: " + path.string());

    std::vector<IssueReport> reports;
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw SchemaViolation(line_no, "record", std::string("invalid JSON: ") + e.what());
        }
        try {
            IssueReport report = parse_report(j, line_no);
            if (!ids.insert(report.id).second) throw DuplicateId(report.id);
            reports.push_back(std::move(report));
        } catch (const nlohmann::json::exception& e) {
            throw SchemaViolation(line_no, "record", e.what());
        }
    }
    if (in.bad()) throw IoFailure("read failed: " + path.string());
    return Dataset::from_reports(std::move(reports));
}

void save(const Dataset& dataset, const std::filesystem::path& path) {
    std::ostringstream out;
    for (const auto& report : dataset.reports) {
        nlohmann::json j{{"id", report.id},
                         {"summary", report.summary},
                         {"description", report.description},
                         {"assignee", report.assignee},
                         {"created_at", format_rfc3339(report.created_at)},
                         {"status", report.status == Status::Resolved ? "resolved" : "other"}};
        if (!report.attachments.empty()) {
            nlohmann::json atts = nlohmann::json::array();
            for (const auto& att : report.attachments) atts.push_back(attachment_to_json(att));
            j["attachments"] = std::move(atts);
        }
        out << j.dump() << '\n';
    }
    write_file_atomic(path, out.str());
}

std::vector<ValidationIssue> validate_file(const std::filesystem::path& path) {
    std::vector<ValidationIssue> issues;
    std::ifstream in(path);
    if (!in) {
        issues.push_back({0, "file", "cannot open: " + path.string()});
        return issues;
    }
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            issues.push_back({line_no, "record", std::string("invalid JSON: ") + e.what()});
            continue;
        }
        try {
            IssueReport report = parse_report(j, line_no);
            if (!ids.insert(report.id).second)
                issues.push_back({line_no, "id", "duplicate report id '" + report.id + "'"});
        } catch (const SchemaViolation& e) {
            issues.push_back({e.line, e.field, e.what()});
        } catch (const nlohmann::json::exception& e) {
            issues.push_back({line_no, "record", e.what()});
        }
    }
    return issues;
}

Dataset filter_resolved(const Dataset& dataset) {
    std::vector<IssueReport> kept;
    kept.reserve(dataset.reports.size());
    for (const auto& report : dataset.reports)
        if (report.status == Status::Resolved) kept.push_back(report);
    return Dataset::from_reports(std::move(kept));
}

Dataset temporal_sort(const Dataset& dataset) {
    std::vector<IssueReport> sorted = dataset.reports;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const IssueReport& a, const IssueReport& b) { return a.created_at < b.created_at; });
    return Dataset::from_reports(std::move(sorted));
}

std::pair<Dataset, Dataset> temporal_split(const Dataset& dataset, std::int64_t cutoff) {
    std::vector<IssueReport> train, test;
    for (const auto& report : dataset.reports) {
        (report.created_at < cutoff ? train : test).push_back(report);
    }
    if (train.empty()) throw EmptySide("train");
    if (test.empty()) throw EmptySide("test");
    return {Dataset::from_reports(std::move(train)), Dataset::from_reports(std::move(test))};
}

std::pair<Dataset, Dataset> random_split(const Dataset& dataset, double train_fraction,
                                         std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw InvalidConfig("train_fraction must be in (0, 1)");
    const std::size_t n = dataset.reports.size();
    const auto train_size =
        static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction + 0.5));
    if (train_size == 0) throw EmptySide("train");
    if (train_size == n) throw EmptySide("test");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<bool> in_train(n, false);
    for (std::size_t i = 0; i < train_size; ++i) in_train[order[i]] = true;

    // Membership is random; each side keeps the dataset's original order.
    std::vector<IssueReport> train, test;
    train.reserve(train_size);
    test.reserve(n - train_size);
    for (std::size_t i = 0; i < n; ++i)
        (in_train[i] ? train : test).push_back(dataset.reports[i]);
    return {Dataset::from_reports(std::move(train)), Dataset::from_reports(std::move(test))};
}

std::uint64_t dataset_fingerprint(const Dataset& dataset) {
    std::uint64_t h = fnv1a64("dataset-v1");
    for (const auto& report : dataset.reports) {
        h = fnv1a64(report.id, h);
        h = fnv1a64(report.assignee, h);
        h = fnv1a64(std::to_string(report.created_at), h);
        h = fnv1a64("|", h);
    }
    return h;
}

void SynthConfig::validate() const {
    if (n_reports < 1) throw InvalidConfig("n_reports must be positive");
    if (n_teams < 1) throw InvalidConfig("n_teams must be positive");
    for (double p : {p_attachment, p_screenshot_given_attachment, p_signal_in_attachment_only}) {
        if (p < 0.0 || p > 1.0) throw InvalidConfig("probabilities must lie in [0, 1]");
    }
    if (mean_words_with_attachment < 1 || mean_words_without < 1)
        throw InvalidConfig("mean word counts must be positive");
    for (const auto& [from, to] : ocr_noise.confusions) {
        if (from.empty()) throw InvalidConfig("confusion source substring must be non-empty");
        (void)to;
    }
}

namespace {

// Pronounceable nonsense words, globally unique across all pools so team
// vocabularies are pairwise disjoint by construction.
class WordFactory {
public:
    explicit WordFactory(Rng& rng) : rng_(rng) {}

    std::string make(int min_syllables, int max_syllables) {
        static const char* kConsonants = "bcdfgkmnprstvyz";
        static const char* kVowels = "aeiou";
        for (;;) {
            const int syllables =
                min_syllables + static_cast<int>(rng_.below(static_cast<std::uint64_t>(
                                    max_syllables - min_syllables + 1)));
            std::string word;
            for (int s = 0; s < syllables; ++s) {
                word += kConsonants[rng_.below(15)];
                word += kVowels[rng_.below(5)];
            }
            if (used_.insert(word).second) return word;
        }
    }

private:
    Rng& rng_;
    std::unordered_set<std::string> used_;
};

std::string apply_confusions(std::string text, const NoiseSpec& noise) {
    if (!noise.enabled) return text;
    for (const auto& [from, to] : noise.confusions) {
        std::string out;
        out.reserve(text.size());
        std::size_t pos = 0;
        while (pos < text.size()) {
            if (text.compare(pos, from.size(), from) == 0) {
                out += to;
                pos += from.size();
            } else {
                out += text[pos];
                ++pos;
            }
        }
        text = std::move(out);
    }
    return text;
}

std::string join_tokens(const std::vector<std::string>& tokens, std::size_t begin, std::size_t end) {
    std::string out;
    for (std::size_t i = begin; i < end && i < tokens.size(); ++i) {
        if (!out.empty()) out += ' ';
        out += tokens[i];
    }
    return out;
}

constexpr int kTeamVocabularySize = 12;
constexpr int kGenericVocabularySize = 200;
constexpr int kBoilerplateVocabularySize = 50;
constexpr double kCrossTeamMentionProb = 0.15;
// Screens are shared infrastructure: a screenshot sometimes shows another
// team's module (workflow engines, shared GUI frameworks).
constexpr double kShotMisleadingProb = 0.20;
// Occasionally the report text cites a code owned by another team.
constexpr double kTextMisleadingProb = 0.03;
constexpr double kOtherStatusProb = 0.02;
// 2019-03-01T00:00:00Z .. 2019-09-01T00:00:00Z
constexpr std::int64_t kTimeBase = 1551398400;
constexpr std::int64_t kTimeSpan = 184ll * 86400;

}  // namespace

SynthVocabulary synth_vocabulary(const SynthConfig& config) {
    config.validate();
    Rng rng(mix_seed(config.seed, 0x564f4341));  // vocabulary stream
    WordFactory factory(rng);

    SynthVocabulary vocab;
    vocab.generic_terms.reserve(kGenericVocabularySize);
    for (int i = 0; i < kGenericVocabularySize; ++i) vocab.generic_terms.push_back(factory.make(2, 3));
    vocab.boilerplate_terms.reserve(kBoilerplateVocabularySize);
    for (int i = 0; i < kBoilerplateVocabularySize; ++i)
        vocab.boilerplate_terms.push_back(factory.make(2, 3));
    vocab.team_terms.resize(static_cast<std::size_t>(config.n_teams));
    for (auto& terms : vocab.team_terms) {
        terms.reserve(kTeamVocabularySize);
        for (int i = 0; i < kTeamVocabularySize; ++i) terms.push_back(factory.make(3, 4));
    }
    return vocab;
}

Dataset generate(const SynthConfig& config) {
    config.validate();
    const SynthVocabulary vocab = synth_vocabulary(config);
    Rng rng(mix_seed(config.seed, 0x47454e));  // report stream

    auto pick = [&rng](const std::vector<std::string>& pool) -> const std::string& {
        return pool[rng.below(pool.size())];
    };

    std::vector<IssueReport> reports;
    reports.reserve(static_cast<std::size_t>(config.n_reports));

    for (int r = 0; r < config.n_reports; ++r) {
        IssueReport report;
        {
            char buf[24];
            std::snprintf(buf, sizeof(buf), "synth-%06d", r);
            report.id = buf;
        }
        const auto team = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(config.n_teams)));
        {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "team-%02u", static_cast<unsigned>(team));
            report.assignee = buf;
        }
        report.created_at = kTimeBase + static_cast<std::int64_t>(rng.below(kTimeSpan));
        report.status = rng.bernoulli(kOtherStatusProb) ? Status::Other : Status::Resolved;

        const bool has_attachment = rng.bernoulli(config.p_attachment);
        const bool has_screenshot = has_attachment && rng.bernoulli(config.p_screenshot_given_attachment);
        const bool signal_hidden = has_screenshot && rng.bernoulli(config.p_signal_in_attachment_only);

        auto other_team = [&] {
            auto other = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(config.n_teams)));
            if (other == team) other = (other + 1) % static_cast<std::size_t>(config.n_teams);
            return other;
        };

        const std::size_t text_source = config.n_teams > 1 && !signal_hidden &&
                                                rng.bernoulli(kTextMisleadingProb)
                                            ? other_team()
                                            : team;
        const std::size_t shot_source =
            config.n_teams > 1 && has_screenshot && rng.bernoulli(kShotMisleadingProb) ? other_team()
                                                                                       : team;

        // --- report text ---
        const int mean_words =
            has_attachment ? config.mean_words_with_attachment : config.mean_words_without;
        int n_words = static_cast<int>(
            std::lround(rng.normal(static_cast<double>(mean_words), static_cast<double>(mean_words) * 0.25)));
        n_words = std::max(n_words, 4);

        std::vector<std::string> words;
        words.reserve(static_cast<std::size_t>(n_words));
        if (!signal_hidden) {
            const int n_signal = 3 + static_cast<int>(rng.below(4));
            for (int i = 0; i < n_signal; ++i) words.push_back(pick(vocab.team_terms[text_source]));
            if (config.n_teams > 1 && rng.bernoulli(kCrossTeamMentionProb)) {
                const auto mentioned = other_team();
                const int n_mention = 1 + static_cast<int>(rng.below(2));
                for (int i = 0; i < n_mention; ++i) words.push_back(pick(vocab.team_terms[mentioned]));
            }
        }
        while (static_cast<int>(words.size()) < n_words) words.push_back(pick(vocab.generic_terms));
        rng.shuffle(words);

        const std::size_t summary_len = std::min<std::size_t>(6, words.size());
        report.summary = join_tokens(words, 0, summary_len);
        report.description = join_tokens(words, summary_len, words.size());

        // --- attachments ---
        int attachment_index = 0;
        auto next_attachment_id = [&] {
            char buf[48];
            std::snprintf(buf, sizeof(buf), "%s-a%d", report.id.c_str(), attachment_index++);
            return std::string(buf);
        };

        if (has_screenshot) {
            const int n_screenshots = rng.bernoulli(0.2) ? 2 : 1;
            for (int s = 0; s < n_screenshots; ++s) {
                std::vector<std::string> shot;
                const int n_boiler = 12 + static_cast<int>(rng.below(10));
                for (int i = 0; i < n_boiler; ++i) shot.push_back(pick(vocab.boilerplate_terms));
                const int n_signal = 3 + static_cast<int>(rng.below(4));
                for (int i = 0; i < n_signal; ++i) shot.push_back(pick(vocab.team_terms[shot_source]));
                rng.shuffle(shot);

                Attachment att;
                att.id = next_attachment_id();
                att.kind = AttachmentKind::Screenshot;
                att.text = apply_confusions(join_tokens(shot, 0, shot.size()), config.ocr_noise);
                att.hash = to_hex(fnv1a64(*att.text));
                report.attachments.push_back(std::move(att));
            }
        }
        if (has_attachment && (!has_screenshot || rng.bernoulli(0.15))) {
            std::vector<std::string> blob;
            const int n_tokens = 6 + static_cast<int>(rng.below(8));
            for (int i = 0; i < n_tokens; ++i) blob.push_back(pick(vocab.generic_terms));
            Attachment att;
            att.id = next_attachment_id();
            att.kind = AttachmentKind::Other;
            att.text = join_tokens(blob, 0, blob.size());
            att.hash = to_hex(fnv1a64(*att.text));
            report.attachments.push_back(std::move(att));
        }

        reports.push_back(std::move(report));
    }

    return Dataset::from_reports(std::move(reports));
}

nlohmann::json synth_config_to_json(const SynthConfig& config) {
    nlohmann::json confusions = nlohmann::json::array();
    for (const auto& [from, to] : config.ocr_noise.confusions) confusions.push_back({from, to});
    return nlohmann::json{{"n_reports", config.n_reports},
                          {"n_teams", config.n_teams},
                          {"p_attachment", config.p_attachment},
                          {"p_screenshot_given_attachment", config.p_screenshot_given_attachment},
                          {"mean_words_with_attachment", config.mean_words_with_attachment},
                          {"mean_words_without", config.mean_words_without},
                          {"p_signal_in_attachment_only", config.p_signal_in_attachment_only},
                          {"ocr_noise", {{"enabled", config.ocr_noise.enabled}, {"confusions", confusions}}},
                          {"seed", config.seed}};
}

SynthConfig synth_config_from_json(const nlohmann::json& j) {
    SynthConfig config;
    config.n_reports = j.value("n_reports", config.n_reports);
    config.n_teams = j.value("n_teams", config.n_teams);
    config.p_attachment = j.value("p_attachment", config.p_attachment);
    config.p_screenshot_given_attachment =
        j.value("p_screenshot_given_attachment", config.p_screenshot_given_attachment);
    config.mean_words_with_attachment =
        j.value("mean_words_with_attachment", config.mean_words_with_attachment);
    config.mean_words_without = j.value("mean_words_without", config.mean_words_without);
    config.p_signal_in_attachment_only =
        j.value("p_signal_in_attachment_only", config.p_signal_in_attachment_only);
    if (j.contains("ocr_noise")) {
        const auto& nj = j.at("ocr_noise");
        config.ocr_noise.enabled = nj.value("enabled", false);
        if (nj.contains("confusions")) {
            config.ocr_noise.confusions.clear();
            for (const auto& pair : nj.at("confusions"))
                config.ocr_noise.confusions.emplace_back(pair.at(0).get<std::string>(),
                                                         pair.at(1).get<std::string>());
        }
    }
    config.seed = j.value("seed", config.seed);
    config.validate();
    return config;
}

}  // namespace triage
