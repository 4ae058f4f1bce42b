// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 triage contributors

#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "triage/models.hpp"
#include "triage/ocr.hpp"

namespace triage {

/// Minimal HTTP assignment endpoint over a trained bundle.
///
///   POST /assign  {summary, description, attachments: [{kind, text | image_b64}]}
///                 -> {team, scores, explanation, routed_to, latency_s}
///   GET  /health  -> {status, model_fingerprint, uptime_s}
///   GET  /model   -> {kind, classes, metadata}
///
/// The bundle pointer swaps atomically on reload(); in-flight requests
/// finish on the bundle they started with. Requests arriving with no bundle
/// loaded get 503.
class AssignmentService {
public:
    AssignmentService(std::filesystem::path bundle_dir, std::shared_ptr<OcrBackend> backend,
                      int top_k = 5);
    ~AssignmentService();

    AssignmentService(const AssignmentService&) = delete;
    AssignmentService& operator=(const AssignmentService&) = delete;

    /// Blocking listen on addr:port. port 0 picks an ephemeral port,
    /// readable through bound_port() once listening() turns true.
    void serve(const std::string& address, int port);

    /// Starts serve() on a background thread and waits until the socket is
    /// accepting. Used by tests and by hot-reload-capable callers.
    void start(const std::string& address, int port);
    void stop();

    /// Re-loads the bundle from disk and swaps it in.
    void reload();

    bool listening() const;
    int bound_port() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace triage
