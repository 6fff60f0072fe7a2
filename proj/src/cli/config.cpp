#include "repograph/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "repograph/core/errors.hpp"

namespace repograph {

namespace {

struct Setter {
    ConfigKey doc;
    std::function<void(CliConfig&, std::string_view)> set;
    std::function<nlohmann::json(const CliConfig&)> get;
};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
    throw ConfigError("invalid value '" + std::string(value) + "' for " + std::string(key) + ": expected " +
                      std::string(want));
}

template <typename T>
T parse_number(std::string_view key, std::string_view v) {
    T out{};
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a number");
    return out;
}

double parse_double(std::string_view key, std::string_view v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(std::string(v), &used);
        if (used == v.size()) return d;
    } catch (const std::exception&) {
    }
    bad_value(key, v, "a number");
}

double parse_fraction(std::string_view key, std::string_view v, bool open) {
    const double d = parse_double(key, v);
    if (open ? !(d > 0.0 && d < 1.0) : !(d >= 0.0 && d <= 1.0)) {
        bad_value(key, v, open ? "a number strictly between 0 and 1" : "a number in [0, 1]");
    }
    return d;
}

bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true") return true;
    if (v == "false") return false;
    bad_value(key, v, "true or false");
}

#define SIZE_KEY(name, help, field)                                                                   \
    Setter {                                                                                          \
        {name, help}, [](CliConfig& c, std::string_view v) { c.field = parse_number<std::size_t>(name, v); }, \
            [](const CliConfig& c) { return nlohmann::json(c.field); }                                \
    }
#define DOUBLE_KEY(name, help, field)                                                                 \
    Setter {                                                                                          \
        {name, help}, [](CliConfig& c, std::string_view v) { c.field = parse_double(name, v); },     \
            [](const CliConfig& c) { return nlohmann::json(c.field); }                                \
    }
#define FRACTION_KEY(name, help, field, open)                                                         \
    Setter {                                                                                          \
        {name, help}, [](CliConfig& c, std::string_view v) { c.field = parse_fraction(name, v, open); }, \
            [](const CliConfig& c) { return nlohmann::json(c.field); }                                \
    }
#define BOOL_KEY(name, help, field)                                                                   \
    Setter {                                                                                          \
        {name, help}, [](CliConfig& c, std::string_view v) { c.field = parse_bool(name, v); },       \
            [](const CliConfig& c) { return nlohmann::json(c.field); }                                \
    }
#define STRING_KEY(name, help, field)                                                                 \
    Setter {                                                                                          \
        {name, help}, [](CliConfig& c, std::string_view v) { c.field = std::string(v); },            \
            [](const CliConfig& c) { return nlohmann::json(c.field); }                                \
    }

std::string_view mock_mode_name(MockMode m) {
    switch (m) {
        case MockMode::Echo: return "echo";
        case MockMode::Canned: return "canned";
        case MockMode::Scoring: return "scoring";
    }
    return "echo";
}

const std::vector<Setter>& setters() {
    static const std::vector<Setter> s = {
        Setter{{"embedder.kind", "deterministic | remote (default deterministic)"},
               [](CliConfig& c, std::string_view v) {
                   if (v == "deterministic") c.pipeline.embedder.kind = EmbedderKind::Deterministic;
                   else if (v == "remote") c.pipeline.embedder.kind = EmbedderKind::Remote;
                   else bad_value("embedder.kind", v, "deterministic or remote");
               },
               [](const CliConfig& c) {
                   return nlohmann::json(c.pipeline.embedder.kind == EmbedderKind::Remote ? "remote" : "deterministic");
               }},
        STRING_KEY("embedder.endpoint", "base URL of the remote embedding service", pipeline.embedder.endpoint),
        SIZE_KEY("embedder.dim", "semantic vector dimension (default 768)", pipeline.embedder.dim),
        SIZE_KEY("embedder.max_in_flight", "concurrent remote embedding requests (default 8)",
                 pipeline.embedder.max_in_flight),
        SIZE_KEY("embedder.batch_size", "texts per remote request (default 64)", pipeline.embedder.batch_size),
        SIZE_KEY("pe.d2", "Laplacian positional encoding width (default 8)", pipeline.pe_dim),
        SIZE_KEY("hnsw.m", "links per node above level 0 (default 32)", pipeline.hnsw.m),
        SIZE_KEY("hnsw.ef_construction", "candidate list while building (default 200)", pipeline.hnsw.ef_construction),
        SIZE_KEY("hnsw.ef_search", "candidate list while searching (default 256)", pipeline.hnsw.ef_search),
        SIZE_KEY("hnsw.seed", "level generator seed (default 42)", pipeline.hnsw.seed),
        SIZE_KEY("units.hops", "subgraph radius around each function (default 2)", pipeline.units.hops),
        SIZE_KEY("units.node_cap", "maximum nodes per subgraph (default 200)", pipeline.units.node_cap),
        SIZE_KEY("retriever.k_s", "semantic hits before merging (default 10)", pipeline.rerank.k_s),
        SIZE_KEY("retriever.k_g", "structural hits before merging (default 10)", pipeline.rerank.k_g),
        SIZE_KEY("retriever.k", "subgraphs kept after MMR (default 3)", pipeline.rerank.k),
        FRACTION_KEY("retriever.alpha", "semantic weight of the hybrid score (default 0.5)", pipeline.rerank.alpha, false),
        FRACTION_KEY("retriever.lambda", "MMR relevance weight (default 0.7)", pipeline.rerank.mmr_lambda, false),
        STRING_KEY("retriever.adaptive_weights", "JSON file with w_alpha and b_alpha (default none)",
                   adaptive_weights),
        FRACTION_KEY("fusion.theta", "attention threshold for cross edges (default 0.4)", pipeline.fusion.theta, true),
        SIZE_KEY("fusion.gnn_layers", "message passing layers (default 2)", pipeline.fusion.gnn_layers),
        SIZE_KEY("fusion.hidden_dim", "encoder width, 0 keeps the input width (default 0)", pipeline.fusion.hidden_dim),
        SIZE_KEY("fusion.seed", "encoder weight seed (default 7)", pipeline.fusion.seed),
        DOUBLE_KEY("prompt.total", "prompt token budget (default 2048)", pipeline.budget.total),
        DOUBLE_KEY("prompt.local", "tokens for the local context (default 1024)", pipeline.budget.local),
        DOUBLE_KEY("prompt.retrieved", "tokens for retrieved context (default 1024)", pipeline.budget.retrieved),
        FRACTION_KEY("prompt.code_share", "share of retrieved tokens for code (default 0.6)", pipeline.budget.code_share, false),
        DOUBLE_KEY("prompt.tokens_per_word", "token estimate per word (default 1.3)", pipeline.tokens.tokens_per_word),
        SIZE_KEY("lexical.window_lines", "window height for vanilla_rag (default 20)", pipeline.window_lines),
        SIZE_KEY("lexical.window_stride", "window stride for vanilla_rag (default 10)", pipeline.window_stride),
        Setter{{"pipeline.variant", "full | no_fusion | bm25 | ast_only | no_rag | vanilla_rag (default full)"},
               [](CliConfig& c, std::string_view v) {
                   const auto var = variant_from_string(v);
                   if (!var) bad_value("pipeline.variant", v, "a variant name");
                   c.pipeline.variant = *var;
               },
               [](const CliConfig& c) { return nlohmann::json(to_string(c.pipeline.variant)); }},
        BOOL_KEY("pipeline.exclude_current_file", "never retrieve from the file being completed (default true)",
                 pipeline.exclude_current_file),
        BOOL_KEY("pipeline.parallel", "use OpenMP kernels (default true)", pipeline.parallel),
        Setter{{"llm.kind", "mock | remote (default mock)"},
               [](CliConfig& c, std::string_view v) {
                   if (v == "mock") c.llm.kind = LlmKind::Mock;
                   else if (v == "remote") c.llm.kind = LlmKind::Remote;
                   else bad_value("llm.kind", v, "mock or remote");
               },
               [](const CliConfig& c) { return nlohmann::json(c.llm.kind == LlmKind::Remote ? "remote" : "mock"); }},
        Setter{{"llm.mock_mode", "echo | canned | scoring (default echo)"},
               [](CliConfig& c, std::string_view v) {
                   if (v == "echo") c.llm.mock_mode = MockMode::Echo;
                   else if (v == "canned") c.llm.mock_mode = MockMode::Canned;
                   else if (v == "scoring") c.llm.mock_mode = MockMode::Scoring;
                   else bad_value("llm.mock_mode", v, "echo, canned or scoring");
               },
               [](const CliConfig& c) { return nlohmann::json(mock_mode_name(c.llm.mock_mode)); }},
        STRING_KEY("llm.endpoint", "chat completions URL", llm.remote.endpoint),
        STRING_KEY("llm.model", "model name sent to the endpoint", llm.remote.model),
        Setter{{"llm.max_tokens", "completion length limit (default 100)"},
               [](CliConfig& c, std::string_view v) { c.llm.remote.max_tokens = parse_number<int>("llm.max_tokens", v); },
               [](const CliConfig& c) { return nlohmann::json(c.llm.remote.max_tokens); }},
        Setter{{"llm.attempts", "tries per request (default 3)"},
               [](CliConfig& c, std::string_view v) { c.llm.remote.attempts = parse_number<int>("llm.attempts", v); },
               [](const CliConfig& c) { return nlohmann::json(c.llm.remote.attempts); }},
        STRING_KEY("llm.api_key_env", "environment variable holding the API key (default REPOGRAPH_API_KEY)",
                   llm.remote.api_key_env),
        SIZE_KEY("eval.max_in_flight", "tasks evaluated concurrently (default 4)", eval.max_in_flight),
        BOOL_KEY("eval.record_latency", "store per-task latency in the report (default true)", eval.record_latency),
    };
    return s;
}

std::string unquote(std::string_view key, std::string v) {
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'')) {
        if (v.back() != v.front()) bad_value(key, v, "a closed string");
        return v.substr(1, v.size() - 2);
    }
    return v;
}

std::string strip_comment(const std::string& line) {
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quote) {
            if (c == quote) quote = 0;
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '#') {
            return line.substr(0, i);
        }
    }
    return line;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> out;
        for (const auto& s : setters()) out.push_back(s.doc);
        return out;
    }();
    return keys;
}

void apply_setting(CliConfig& cfg, std::string_view key, std::string_view value) {
    for (const auto& s : setters()) {
        if (s.doc.key == key) {
            s.set(cfg, value);
            return;
        }
    }
    throw ConfigError("unknown config key: " + std::string(key));
}

void apply_config_text(CliConfig& cfg, std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string raw;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const auto name = trim(std::string_view(line).substr(0, eq));
        const auto key = section.empty() ? name : section + "." + name;
        apply_setting(cfg, key, unquote(key, trim(std::string_view(line).substr(eq + 1))));
    }
}

void apply_config_file(CliConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    apply_config_text(cfg, ss.str());
}

nlohmann::json config_json(const CliConfig& cfg) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& s : setters()) j[s.doc.key] = s.get(cfg);
    return j;
}

void finalize_config(CliConfig& cfg) {
    if (!cfg.adaptive_weights.empty()) cfg.pipeline.rerank.adaptive = load_adaptive_weights(cfg.adaptive_weights);
    cfg.pipeline.fusion.pe_dim = cfg.pipeline.pe_dim;
    cfg.pipeline.fusion.exec = cfg.pipeline.parallel ? kernels::Exec::Parallel : kernels::Exec::Serial;
}

std::unique_ptr<CompletionBackend> make_backend(const LlmSettings& s, HttpTransport transport) {
    if (s.kind == LlmKind::Mock) return std::make_unique<MockBackend>(s.mock_mode);
    if (s.remote.endpoint.empty()) throw ConfigError("llm.endpoint is required for the remote backend");
    if (!transport) transport = make_http_transport();
    return std::make_unique<RemoteHttpBackend>(s.remote, std::move(transport));
}

}  // namespace repograph
