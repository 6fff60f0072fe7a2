#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "repograph/core/http.hpp"
#include "repograph/graph/diagnostics.hpp"

namespace repograph {

struct CompletionResult {
    std::string completed_code;  // one line
    std::string explanation;
    double confidence_score = 0.0;
    std::vector<std::string> referenced_nodes;
    std::string raw;
    Diagnostics diagnostics;
};

struct CompletionRequest {
    std::string task_id;
    std::string prompt;
    std::optional<std::string> groundtruth;  // only mock backends look at it
};

class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;
    virtual std::string_view name() const = 0;
    /// Raw model reply. Throws TransportError when the backend cannot be reached.
    virtual std::string complete_raw(const CompletionRequest& request) const = 0;
};

enum class MockMode {
    Echo,     // answers the request's groundtruth
    Canned,   // answers a fixed reply per task id
    Scoring,  // answers the groundtruth only when the prompt contains the task's needle
};

/// Offline deterministic backend.
class MockBackend final : public CompletionBackend {
public:
    explicit MockBackend(MockMode mode = MockMode::Echo) : mode_(mode) {}

    std::string_view name() const override { return "mock"; }
    std::string complete_raw(const CompletionRequest& request) const override;

    void set_canned(std::string task_id, std::string reply) { canned_[std::move(task_id)] = std::move(reply); }
    void set_needle(std::string task_id, std::string needle) { needles_[std::move(task_id)] = std::move(needle); }
    /// Reply used by Scoring when the needle is missing.
    void set_fallback(std::string code) { fallback_ = std::move(code); }

private:
    MockMode mode_;
    std::map<std::string, std::string> canned_;
    std::map<std::string, std::string> needles_;
    std::string fallback_;
};

struct RemoteLlmConfig {
    std::string endpoint;  // full URL of the chat completions route
    std::string model;
    std::string api_key_env = "REPOGRAPH_API_KEY";
    int max_tokens = 100;
    double temperature = 0.0;
    int attempts = 3;
    std::chrono::milliseconds backoff{200};  // doubled after every failed attempt
};

/// OpenAI-style chat completion over HTTP.
class RemoteHttpBackend final : public CompletionBackend {
public:
    RemoteHttpBackend(RemoteLlmConfig cfg, HttpTransport transport);

    std::string_view name() const override { return "remote"; }
    std::string complete_raw(const CompletionRequest& request) const override;

private:
    RemoteLlmConfig cfg_;
    HttpTransport transport_;
};

/// Parses a reply: plain JSON, then with code fences stripped, then the first balanced
/// {...} block. Never throws; failures give an empty completion with confidence 0.
CompletionResult parse_completion(std::string_view raw);

/// complete_raw followed by parse_completion. Transport errors propagate.
CompletionResult complete(const CompletionRequest& request, const CompletionBackend& backend);

}  // namespace repograph
