#include "repograph/llm/llm_client.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include <json.hpp>

#include "repograph/core/errors.hpp"

namespace repograph {

namespace {

std::string reply_for(const std::string& code, std::string_view explanation, double confidence) {
    return nlohmann::json{{"completed_code", code},
                          {"explanation", explanation},
                          {"confidence_score", confidence},
                          {"referenced_nodes", nlohmann::json::array()}}
        .dump();
}

std::optional<nlohmann::json> parse_object(std::string_view text) {
    auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    return j;
}

std::optional<std::string> strip_fences(std::string_view text) {
    const auto open = text.find("```");
    if (open == std::string_view::npos) return std::nullopt;
    auto body = text.find('\n', open);
    if (body == std::string_view::npos) return std::nullopt;
    ++body;
    const auto close = text.find("```", body);
    return std::string(text.substr(body, close == std::string_view::npos ? std::string_view::npos : close - body));
}

std::optional<std::string> first_balanced_object(std::string_view text) {
    for (auto start = text.find('{'); start != std::string_view::npos; start = text.find('{', start + 1)) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (std::size_t i = start; i < text.size(); ++i) {
            const char c = text[i];
            if (in_string) {
                if (escaped) escaped = false;
                else if (c == '\\') escaped = true;
                else if (c == '"') in_string = false;
                continue;
            }
            if (c == '"') in_string = true;
            else if (c == '{') ++depth;
            else if (c == '}' && --depth == 0) return std::string(text.substr(start, i - start + 1));
        }
    }
    return std::nullopt;
}

std::string as_text(const nlohmann::json& j) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_null()) return "";
    return j.dump();
}

}  // namespace

std::string MockBackend::complete_raw(const CompletionRequest& request) const {
    switch (mode_) {
        case MockMode::Echo:
            return reply_for(request.groundtruth.value_or(""), "echo", 1.0);
        case MockMode::Canned: {
            const auto it = canned_.find(request.task_id);
            return it == canned_.end() ? reply_for("", "no canned reply", 0.0) : it->second;
        }
        case MockMode::Scoring: {
            const auto it = needles_.find(request.task_id);
            const bool hit = it != needles_.end() && request.prompt.find(it->second) != std::string::npos;
            return hit ? reply_for(request.groundtruth.value_or(""), "needle found", 0.9)
                       : reply_for(fallback_, "needle missing", 0.1);
        }
    }
    return reply_for("", "", 0.0);
}

RemoteHttpBackend::RemoteHttpBackend(RemoteLlmConfig cfg, HttpTransport transport)
    : cfg_(std::move(cfg)), transport_(std::move(transport)) {
    if (cfg_.endpoint.empty()) throw ConfigError("llm.endpoint is required for the remote backend");
    if (!transport_) transport_ = make_http_transport();
    cfg_.attempts = std::max(cfg_.attempts, 1);
}

std::string RemoteHttpBackend::complete_raw(const CompletionRequest& request) const {
    HttpRequest req;
    req.url = cfg_.endpoint;
    req.headers["Content-Type"] = "application/json";
    if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key) {
        req.headers["Authorization"] = std::string("Bearer ") + key;
    }
    req.body = nlohmann::json{{"model", cfg_.model},
                              {"temperature", cfg_.temperature},
                              {"max_tokens", cfg_.max_tokens},
                              {"messages", {{{"role", "user"}, {"content", request.prompt}}}}}
                   .dump();
    auto delay = cfg_.backoff;
    std::string last_error;
    for (int attempt = 1; attempt <= cfg_.attempts; ++attempt) {
        try {
            const auto res = transport_(req);
            if (res.status == 200) {
                const auto j = nlohmann::json::parse(res.body, nullptr, false);
                if (j.is_discarded()) return res.body;
                try {
                    return as_text(j.at("choices").at(0).at("message").at("content"));
                } catch (const nlohmann::json::exception&) {
                    return res.body;
                }
            }
            last_error = "HTTP " + std::to_string(res.status);
        } catch (const TransportError& e) {
            last_error = e.what();
        }
        if (attempt < cfg_.attempts) {
            std::this_thread::sleep_for(delay);
            delay *= 2;
        }
    }
    throw TransportError("completion backend failed after " + std::to_string(cfg_.attempts) +
                         " attempts: " + last_error);
}

CompletionResult parse_completion(std::string_view raw) {
    CompletionResult r;
    r.raw = std::string(raw);
    auto j = parse_object(raw);
    if (!j) {
        if (const auto body = strip_fences(raw)) j = parse_object(*body);
    }
    if (!j) {
        if (const auto block = first_balanced_object(raw)) j = parse_object(*block);
    }
    if (!j) {
        r.diagnostics.push_back({"", 0, "unparseable_response", "reply is not a JSON object"});
        return r;
    }
    if (const auto it = j->find("completed_code"); it != j->end()) r.completed_code = as_text(*it);
    if (const auto it = j->find("explanation"); it != j->end()) r.explanation = as_text(*it);
    if (const auto it = j->find("confidence_score"); it != j->end() && it->is_number()) {
        r.confidence_score = std::clamp(it->get<double>(), 0.0, 1.0);
    }
    if (const auto it = j->find("referenced_nodes"); it != j->end() && it->is_array()) {
        for (const auto& n : *it) r.referenced_nodes.push_back(as_text(n));
    }
    if (const auto nl = r.completed_code.find('\n'); nl != std::string::npos) {
        r.completed_code.resize(nl);
        r.diagnostics.push_back({"", 0, "multiline_completion", "completed_code truncated at the first newline"});
    }
    if (!r.completed_code.empty() && r.completed_code.back() == '\r') r.completed_code.pop_back();
    return r;
}

CompletionResult complete(const CompletionRequest& request, const CompletionBackend& backend) {
    if (request.prompt.empty()) throw std::invalid_argument("complete: empty prompt");
    return parse_completion(backend.complete_raw(request));
}

}  // namespace repograph
