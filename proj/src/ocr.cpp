// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 triage contributors

#include "triage/ocr.hpp"

#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "triage/errors.hpp"
#include "triage/util.hpp"

namespace triage {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out += c;
        }
    }
    out += "'";
    return out;
}

}  // namespace

FixtureBackend::FixtureBackend(std::map<std::string, std::string> entries)
    : entries_(std::move(entries)) {}

FixtureBackend FixtureBackend::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open fixture map: " + path.string());
    std::map<std::string, std::string> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        entries[j.at("hash").get<std::string>()] = j.at("text").get<std::string>();
    }
    return FixtureBackend(std::move(entries));
}

std::string FixtureBackend::extract_text(const Attachment& attachment,
                                         const std::optional<std::string>& payload) {
    std::string hash = attachment.hash;
    if (hash.empty() && payload) hash = to_hex(fnv1a64(*payload));
    auto it = entries_.find(hash);
    if (it == entries_.end())
        throw BackendFailure("fixture map has no entry for hash '" + hash + "' (attachment '" +
                             attachment.id + "')");
    return it->second;
}

CommandBackend::CommandBackend(std::string command_template) : template_(std::move(command_template)) {
    if (template_.find("{input}") == std::string::npos)
        throw InvalidConfig("command template must contain the {input} placeholder");
}

std::string CommandBackend::extract_text(const Attachment& attachment,
                                         const std::optional<std::string>& payload) {
    std::filesystem::path input;
    std::filesystem::path temp;
    if (attachment.path) {
        input = *attachment.path;
    } else if (payload) {
        temp = std::filesystem::temp_directory_path() /
               ("triage-ocr-" + std::to_string(::getpid()) + "-" + to_hex(fnv1a64(*payload)));
        std::ofstream out(temp, std::ios::binary);
        out.write(payload->data(), static_cast<std::streamsize>(payload->size()));
        if (!out) throw UnreadablePayload("cannot stage payload for attachment '" + attachment.id + "'");
        out.close();
        input = temp;
    } else {
        throw UnreadablePayload("attachment '" + attachment.id + "' has no path and no payload");
    }

    std::string command = template_;
    const auto pos = command.find("{input}");
    command.replace(pos, 7, shell_quote(input.string()));
    command += " 2>/dev/null";

    FILE* pipe = ::popen(command.c_str(), "r");
    if (!pipe) {
        if (!temp.empty()) std::filesystem::remove(temp);
        throw BackendFailure("failed to launch: " + command);
    }
    std::string text;
    char buf[4096];
    std::size_t got = 0;
    while ((got = std::fread(buf, 1, sizeof(buf), pipe)) > 0) text.append(buf, got);
    const int status = ::pclose(pipe);
    if (!temp.empty()) {
        std::error_code ec;
        std::filesystem::remove(temp, ec);
    }
    if (status != 0)
        throw BackendFailure("backend exited with status " + std::to_string(status) + ": " + command);
    return text;
}

std::string StubBackend::extract_text(const Attachment& attachment,
                                      const std::optional<std::string>& payload) {
    (void)attachment;
    (void)payload;
    std::this_thread::sleep_for(std::chrono::duration<double>(delay_s_));
    return text_;
}

std::unique_ptr<OcrBackend> make_backend(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "fixture") {
        return std::make_unique<FixtureBackend>(FixtureBackend::load(rest));
    }
    if (kind == "command") {
        return std::make_unique<CommandBackend>(rest);
    }
    if (kind == "stub") {
        const auto second = rest.find(':');
        const double millis = std::stod(rest.substr(0, second));
        const std::string text = second == std::string::npos ? "stub text" : rest.substr(second + 1);
        return std::make_unique<StubBackend>(millis / 1000.0, text);
    }
    throw InvalidConfig("unknown backend spec '" + spec + "' (expected fixture:, command: or stub:)");
}

OcrCache::OcrCache(OcrCache&& other) noexcept {
    std::lock_guard lock(other.mutex_);
    entries_ = std::move(other.entries_);
    file_ = std::move(other.file_);
}

OcrCache& OcrCache::operator=(OcrCache&& other) noexcept {
    if (this != &other) {
        std::scoped_lock lock(mutex_, other.mutex_);
        entries_ = std::move(other.entries_);
        file_ = std::move(other.file_);
    }
    return *this;
}

OcrCache OcrCache::open(const std::filesystem::path& path) {
    OcrCache cache;
    cache.file_ = path;
    if (!std::filesystem::exists(path)) {
        if (path.has_parent_path()) {
            std::error_code ec;
            std::filesystem::create_directories(path.parent_path(), ec);
        }
        std::ofstream touch(path, std::ios::app);
        if (!touch) throw IoFailure("cannot create cache file: " + path.string());
        return cache;
    }
    std::ifstream in(path);
    if (in) {
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded()) continue;  // torn tail write; ignore
            OcrResult result;
            result.source_hash = j.value("hash", "");
            result.backend_id = j.value("backend_id", "");
            result.text = j.value("text", "");
            result.duration_s = j.value("duration_s", 0.0);
            if (!result.source_hash.empty()) cache.entries_[result.source_hash] = std::move(result);
        }
    }
    return cache;
}

std::optional<OcrResult> OcrCache::lookup(const std::string& hash) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(hash);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void OcrCache::store(const OcrResult& result) {
    std::lock_guard lock(mutex_);
    entries_[result.source_hash] = result;
    if (!file_.empty()) {
        std::ofstream out(file_, std::ios::app);
        if (!out) throw IoFailure("cannot append to cache file: " + file_.string());
        out << nlohmann::json{{"hash", result.source_hash},
                              {"backend_id", result.backend_id},
                              {"text", result.text},
                              {"duration_s", result.duration_s}}
                   .dump()
            << '\n';
    }
}

std::size_t OcrCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

OcrResult extract(const Attachment& attachment, OcrBackend& backend, OcrCache& cache) {
    if (attachment.kind != AttachmentKind::Screenshot)
        throw Error("extract called on a non-screenshot attachment '" + attachment.id + "'");

    const auto start = std::chrono::steady_clock::now();

    // Pre-extracted text needs no engine.
    if (attachment.text) {
        OcrResult result;
        result.text = *attachment.text;
        result.backend_id = "inline";
        result.source_hash =
            attachment.hash.empty() ? to_hex(fnv1a64(*attachment.text)) : attachment.hash;
        result.duration_s = seconds_since(start);
        return result;
    }

    std::optional<std::string> payload;
    std::string hash = attachment.hash;
    if (attachment.path) {
        try {
            payload = read_file(*attachment.path);
        } catch (const IoFailure& e) {
            throw UnreadablePayload(e.what());
        }
        if (hash.empty()) hash = to_hex(fnv1a64(*payload));
    }
    if (hash.empty())
        throw UnreadablePayload("attachment '" + attachment.id + "' has no text, path or hash");

    if (auto hit = cache.lookup(hash)) return *hit;

    OcrResult result;
    result.text = backend.extract_text(attachment, payload);
    result.backend_id = backend.id();
    result.source_hash = hash;
    result.duration_s = seconds_since(start);
    cache.store(result);
    return result;
}

std::map<std::string, std::string> extract_all(const Dataset& dataset, OcrBackend& backend,
                                               OcrCache& cache, FailurePolicy policy, int threads,
                                               std::vector<ExtractFailure>* failures) {
    const std::size_t n = dataset.reports.size();
    std::vector<std::string> texts(n);
    std::vector<ExtractFailure> collected;
    std::mutex failures_mutex;
    std::atomic<bool> abort{false};
    std::exception_ptr first_error;

    auto process = [&](std::size_t i) {
        const auto& report = dataset.reports[i];
        std::string joined;
        for (const auto& att : report.attachments) {
            if (att.kind != AttachmentKind::Screenshot) continue;
            std::string text;
            try {
                text = extract(att, backend, cache).text;
            } catch (const std::exception& e) {
                if (policy == FailurePolicy::FailFast) {
                    std::lock_guard lock(failures_mutex);
                    if (!first_error) first_error = std::current_exception();
                    abort.store(true);
                    return;
                }
                std::lock_guard lock(failures_mutex);
                collected.push_back({report.id, att.id, e.what()});
            }
            if (!joined.empty()) joined += '\n';
            joined += text;
        }
        texts[i] = std::move(joined);
    };

    const int workers = std::max(1, threads);
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n && !abort.load(); ++i) process(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const auto count = static_cast<std::size_t>(std::min<std::size_t>(static_cast<std::size_t>(workers), n));
        pool.reserve(count);
        for (std::size_t t = 0; t < count; ++t) {
            pool.emplace_back([&] {
                for (;;) {
                    if (abort.load()) return;
                    const std::size_t i = next.fetch_add(1);
                    if (i >= n) return;
                    process(i);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    if (first_error) std::rethrow_exception(first_error);

    std::map<std::string, std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.emplace(dataset.reports[i].id, std::move(texts[i]));
    if (failures) *failures = std::move(collected);
    return out;
}

}  // namespace triage
