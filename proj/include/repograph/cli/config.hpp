#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "repograph/eval/eval.hpp"
#include "repograph/llm/llm_client.hpp"
#include "repograph/pipeline/pipeline.hpp"

namespace repograph {

enum class LlmKind { Mock, Remote };

struct LlmSettings {
    LlmKind kind = LlmKind::Mock;
    MockMode mock_mode = MockMode::Echo;
    RemoteLlmConfig remote;
};

/// Every tunable of the pipeline, the completion backend and the evaluation harness.
struct CliConfig {
    PipelineConfig pipeline;
    LlmSettings llm;
    BenchmarkOptions eval;
    std::string adaptive_weights;  // path; empty means fixed alpha
};

struct ConfigKey {
    std::string key;
    std::string help;
};

/// Keys accepted in config files and by --set, in display order.
const std::vector<ConfigKey>& config_keys();

/// Assigns one dotted key. Throws ConfigError for unknown keys or malformed values.
void apply_setting(CliConfig& cfg, std::string_view key, std::string_view value);

/// TOML-style document: `[section]` headers, `key = value` lines, `#` comments.
/// Quoted strings, numbers and booleans. Throws ConfigError.
void apply_config_text(CliConfig& cfg, std::string_view text);
void apply_config_file(CliConfig& cfg, const std::filesystem::path& path);

/// Effective value of every key.
nlohmann::json config_json(const CliConfig& cfg);

/// Loads the adaptive weights when configured.
void finalize_config(CliConfig& cfg);

std::unique_ptr<CompletionBackend> make_backend(const LlmSettings& s, HttpTransport transport = nullptr);

}  // namespace repograph
