// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 triage contributors

#include "triage/service.hpp"

#include <algorithm>
#include <chrono>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "triage/errors.hpp"
#include "triage/util.hpp"

namespace triage {

struct AssignmentService::Impl {
    std::filesystem::path bundle_dir;
    std::shared_ptr<OcrBackend> backend;
    int top_k;

    httplib::Server server;
    std::thread server_thread;
    std::chrono::steady_clock::time_point started_at = std::chrono::steady_clock::now();

    mutable std::mutex bundle_mutex;
    std::shared_ptr<const AssignmentModel> bundle;

    int port = 0;

    std::shared_ptr<const AssignmentModel> current_bundle() const {
        std::lock_guard lock(bundle_mutex);
        return bundle;
    }

    void swap_bundle(std::shared_ptr<const AssignmentModel> fresh) {
        std::lock_guard lock(bundle_mutex);
        bundle = std::move(fresh);
    }

    void route(const httplib::Request& req, httplib::Response& res);
};

void AssignmentService::Impl::route(const httplib::Request& req, httplib::Response& res) {
    const auto model = current_bundle();
    if (!model) {
        res.status = 503;
        res.set_content(nlohmann::json{{"error", "bundle not loaded"}}.dump(), "application/json");
        return;
    }

    const auto started = std::chrono::steady_clock::now();

    nlohmann::json body;
    try {
        body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception& e) {
        res.status = 400;
        res.set_content(nlohmann::json{{"error", std::string("malformed JSON: ") + e.what()}}.dump(),
                        "application/json");
        return;
    }

    IssueReport report;
    report.id = "request";
    report.assignee = "-";
    report.status = Status::Resolved;
    report.created_at = current_epoch_seconds();
    report.summary = body.value("summary", std::string{});
    report.description = body.value("description", std::string{});
    if (report.summary.empty() && report.description.empty()) {
        res.status = 422;
        res.set_content(
            nlohmann::json{{"error", "at least one of summary/description must be non-empty"}}.dump(),
            "application/json");
        return;
    }

    std::string attachment_text;
    try {
        if (body.contains("attachments")) {
            if (!body.at("attachments").is_array()) throw Error("attachments must be an array");
            int index = 0;
            OcrCache scratch;  // per-request; extraction results are tiny
            for (const auto& aj : body.at("attachments")) {
                Attachment att;
                att.id = "request-a" + std::to_string(index++);
                const std::string kind = aj.value("kind", "screenshot");
                att.kind = kind == "screenshot" ? AttachmentKind::Screenshot : AttachmentKind::Other;
                if (att.kind != AttachmentKind::Screenshot) {
                    report.attachments.push_back(att);
                    continue;
                }
                std::string text;
                if (aj.contains("text")) {
                    att.text = aj.at("text").get<std::string>();
                    att.hash = to_hex(fnv1a64(*att.text));
                    text = *att.text;
                } else if (aj.contains("image_b64")) {
                    const auto bytes = base64_decode(aj.at("image_b64").get<std::string>());
                    if (!bytes) throw Error("attachment image_b64 is not valid base64");
                    att.hash = to_hex(fnv1a64(*bytes));
                    if (!backend) throw Error("no OCR backend configured for image payloads");
                    Attachment probe = att;
                    text = backend->extract_text(probe, bytes);
                    att.text = text;
                } else {
                    throw Error("screenshot attachment needs 'text' or 'image_b64'");
                }
                report.attachments.push_back(att);
                if (!attachment_text.empty()) attachment_text += '\n';
                attachment_text += text;
            }
        }
    } catch (const std::exception& e) {
        res.status = 422;
        res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
        return;
    }

    try {
        const auto result = model->assign(report, attachment_text, top_k);
        auto j = assignment_result_to_json(result, top_k);
        j["latency_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        res.status = 200;
        res.set_content(j.dump(), "application/json");
    } catch (const std::exception& e) {
        res.status = 422;
        res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
    }
}

AssignmentService::AssignmentService(std::filesystem::path bundle_dir,
                                     std::shared_ptr<OcrBackend> backend, int top_k)
    : impl_(std::make_unique<Impl>()) {
    impl_->bundle_dir = std::move(bundle_dir);
    impl_->backend = std::move(backend);
    impl_->top_k = top_k;

    impl_->swap_bundle(std::make_shared<const AssignmentModel>(AssignmentModel::load(impl_->bundle_dir)));

    impl_->server.Post("/assign", [this](const httplib::Request& req, httplib::Response& res) {
        impl_->route(req, res);
    });

    impl_->server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
        const auto model = impl_->current_bundle();
        if (!model) {
            res.status = 503;
            res.set_content(nlohmann::json{{"status", "reloading"}}.dump(), "application/json");
            return;
        }
        const double uptime =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - impl_->started_at).count();
        res.set_content(nlohmann::json{{"status", "ok"},
                                       {"model_fingerprint", to_hex(model->fingerprint())},
                                       {"uptime_s", uptime}}
                            .dump(),
                        "application/json");
    });

    impl_->server.Get("/model", [this](const httplib::Request&, httplib::Response& res) {
        const auto model = impl_->current_bundle();
        if (!model) {
            res.status = 503;
            res.set_content(nlohmann::json{{"error", "bundle not loaded"}}.dump(), "application/json");
            return;
        }
        res.set_content(nlohmann::json{{"kind", to_string(model->kind())},
                                       {"classes", model->classes()},
                                       {"fingerprint", to_hex(model->fingerprint())}}
                            .dump(),
                        "application/json");
    });
}

AssignmentService::~AssignmentService() { stop(); }

void AssignmentService::serve(const std::string& address, int port) {
    if (port == 0) {
        impl_->port = impl_->server.bind_to_any_port(address);
        if (impl_->port < 0) throw Error("failed to bind " + address);
        impl_->server.listen_after_bind();
    } else {
        impl_->port = port;
        if (!impl_->server.bind_to_port(address, port))
            throw Error("failed to bind " + address + ":" + std::to_string(port));
        impl_->server.listen_after_bind();
    }
}

void AssignmentService::start(const std::string& address, int port) {
    impl_->server_thread = std::thread([this, address, port] { serve(address, port); });
    for (int i = 0; i < 1000 && !impl_->server.is_running(); ++i)
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    if (!impl_->server.is_running()) throw Error("server failed to start");
}

void AssignmentService::stop() {
    if (impl_->server.is_running()) impl_->server.stop();
    if (impl_->server_thread.joinable()) impl_->server_thread.join();
}

void AssignmentService::reload() {
    // Load off to the side first; requests keep the old bundle until the
    // swap, and keep working on it even mid-request afterwards.
    auto fresh = std::make_shared<const AssignmentModel>(AssignmentModel::load(impl_->bundle_dir));
    impl_->swap_bundle(std::move(fresh));
}

bool AssignmentService::listening() const { return impl_->server.is_running(); }

int AssignmentService::bound_port() const { return impl_->port; }

}  // namespace triage
