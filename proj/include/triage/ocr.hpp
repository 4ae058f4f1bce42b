// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 triage contributors

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "triage/corpus.hpp"

namespace triage {

struct OcrResult {
    std::string text;
    double duration_s = 0.0;  // end to end, including payload load
    std::string backend_id;
    std::string source_hash;
};

/// Text-extraction engine behind a narrow interface so a real OCR binary, a
/// hash-keyed fixture map and a constant-delay stub are interchangeable.
class OcrBackend {
public:
    virtual ~OcrBackend() = default;
    virtual std::string id() const = 0;
    /// payload carries the raw bytes when the attachment was readable;
    /// fixture backends may work from the hash alone.
    virtual std::string extract_text(const Attachment& attachment,
                                     const std::optional<std::string>& payload) = 0;
};

/// Hash -> text map loaded from a JSONL sidecar file ({"hash":..,"text":..}
/// per line). Misses are BackendFailure: a fixture that does not know an
/// image is a broken fixture.
class FixtureBackend : public OcrBackend {
public:
    explicit FixtureBackend(std::map<std::string, std::string> entries);
    static FixtureBackend load(const std::filesystem::path& path);

    std::string id() const override { return "fixture"; }
    std::string extract_text(const Attachment& attachment,
                             const std::optional<std::string>& payload) override;

private:
    std::map<std::string, std::string> entries_;
};

/// Invokes an external executable per image. The command template must
/// contain `{input}`, replaced with the (shell-quoted) image path; extracted
/// text is read from the child's standard output.
class CommandBackend : public OcrBackend {
public:
    explicit CommandBackend(std::string command_template);

    std::string id() const override { return "command:" + template_; }
    std::string extract_text(const Attachment& attachment,
                             const std::optional<std::string>& payload) override;

private:
    std::string template_;
};

/// Constant-delay, constant-text backend for timing harnesses and tests.
class StubBackend : public OcrBackend {
public:
    StubBackend(double delay_s, std::string text) : delay_s_(delay_s), text_(std::move(text)) {}

    std::string id() const override { return "stub"; }
    std::string extract_text(const Attachment& attachment,
                             const std::optional<std::string>& payload) override;

private:
    double delay_s_;
    std::string text_;
};

/// Parses a backend spec string: "fixture:<map-file>", "command:<template>"
/// or "stub:<millis>[:<text>]".
std::unique_ptr<OcrBackend> make_backend(const std::string& spec);

/// Content-hash keyed store of extraction results, persisted as an
/// append-only JSONL log so results survive across runs and retraining never
/// repeats the OCR work.
class OcrCache {
public:
    OcrCache() = default;  // in-memory only
    static OcrCache open(const std::filesystem::path& path);

    std::optional<OcrResult> lookup(const std::string& hash) const;
    void store(const OcrResult& result);
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::unordered_map<std::string, OcrResult> entries_;
    std::filesystem::path file_;  // empty for in-memory caches

public:
    OcrCache(OcrCache&& other) noexcept;
    OcrCache& operator=(OcrCache&& other) noexcept;
};

/// Extracts text for one screenshot attachment. Inline pre-extracted text is
/// returned as-is (backend untouched); otherwise the cache is consulted by
/// content hash and only a miss reaches the backend. Duration covers payload
/// load + extraction.
OcrResult extract(const Attachment& attachment, OcrBackend& backend, OcrCache& cache);

enum class FailurePolicy { FailFast, SubstituteEmpty };

struct ExtractFailure {
    std::string report_id;
    std::string attachment_id;
    std::string message;
};

/// Per-report screenshot texts concatenated in attachment order with
/// newlines; reports without screenshots map to empty text. Fans out to a
/// bounded worker pool; the result does not depend on the schedule.
std::map<std::string, std::string> extract_all(const Dataset& dataset, OcrBackend& backend,
                                               OcrCache& cache,
                                               FailurePolicy policy = FailurePolicy::FailFast,
                                               int threads = 1,
                                               std::vector<ExtractFailure>* failures = nullptr);

}  // namespace triage
