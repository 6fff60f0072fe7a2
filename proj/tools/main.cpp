#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "repograph/cli/config.hpp"
#include "repograph/core/errors.hpp"
#include "repograph/graph/graph_store.hpp"

namespace fs = std::filesystem;
using namespace repograph;

namespace {

enum Exit : int {
    kOk = 0,
    kUsage = 1,
    kIo = 2,
    kEmptyCorpus = 3,
    kCursor = 4,
    kBackend = 5,
};

constexpr const char* kExitCodes =
    "Exit codes: 0 success, 1 usage or configuration error, 2 I/O failure, 3 empty corpus,\n"
    "4 cursor outside the file, 5 completion backend failure.";

struct Common {
    std::string config_file;
    std::vector<std::string> sets;
};

struct Cursor {
    std::string index_dir;
    std::string file;
    std::string source;
    std::uint32_t line = 0;
    std::uint32_t col = 0;
};

std::string config_help() {
    std::ostringstream out;
    out << "Configuration keys (file sections or --set section.key=value):\n";
    for (const auto& k : config_keys()) out << "  " << k.key << "  " << k.help << "\n";
    out << kExitCodes;
    return out.str();
}

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_file, "TOML-style config file; flags override it");
    cmd->add_option("--set", c.sets, "Override one key, e.g. --set retriever.k=5");
}

CliConfig load_config(const Common& c) {
    CliConfig cfg;
    if (!c.config_file.empty()) apply_config_file(cfg, c.config_file);
    for (const auto& s : c.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got " + s);
        apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    return cfg;
}

void add_cursor(CLI::App* cmd, Cursor& c) {
    cmd->add_option("index_dir", c.index_dir, "Directory written by `index`")->required();
    cmd->add_option("--file", c.file, "Repository-relative path of the file being edited")->required();
    cmd->add_option("--line", c.line, "1-based cursor line")->required();
    cmd->add_option("--col", c.col, "1-based cursor column")->required();
    cmd->add_option("--source", c.source, "Read the file content from here instead of the indexed repository");
}

void print(const nlohmann::json& j) { std::cout << j.dump(2) << "\n"; }

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out || !(out << text)) throw IoError("cannot write " + p.string());
}

nlohmann::json candidate_json(const RetrievedCandidate& c, const IndexSet& set) {
    nlohmann::json j = {{"subgraph_id", c.subgraph_id}, {"sem_sim", c.sem_sim}, {"struct_sim", c.struct_sim},
                        {"score", c.score},             {"origin", to_string(c.origin)}};
    if (const auto* u = set.unit(c.subgraph_id)) {
        j["file_path"] = u->file_path;
        j["name"] = u->name;
        j["anchor"] = u->anchor.hex();
    }
    return j;
}

nlohmann::json hits_json(const std::vector<SearchHit>& hits) {
    auto out = nlohmann::json::array();
    for (const auto& h : hits) out.push_back({{"subgraph_id", h.id}, {"score", h.score}});
    return out;
}

struct Loaded {
    CliConfig cfg;
    std::unique_ptr<TextEmbedder> embedder;
    IndexedRepo repo;
    QueryContext ctx;
};

Loaded load_for_cursor(const Common& common, const Cursor& cursor, const std::string& ablate) {
    Loaded l;
    l.cfg = load_config(common);
    if (!ablate.empty()) apply_setting(l.cfg, "pipeline.variant", ablate);
    finalize_config(l.cfg);
    const fs::path dir = cursor.index_dir;
    if (!fs::is_directory(dir)) throw IoError("index directory not found: " + dir.string());
    l.embedder = make_embedder(l.cfg.pipeline.embedder);
    l.repo = load_artifacts(dir, l.cfg.pipeline);
    fs::path source = cursor.source;
    if (source.empty()) {
        const auto meta = nlohmann::json::parse(read_file(dir / "repo.json"));
        source = fs::path(meta.at("root").get<std::string>()) / cursor.file;
    }
    l.ctx.repo_name = l.repo.repo_name;
    l.ctx.file_path = cursor.file;
    l.ctx.source = read_file(source);
    l.ctx.line = cursor.line;
    l.ctx.col = cursor.col;
    cursor_offset(l.ctx.source, l.ctx.line, l.ctx.col);
    return l;
}

int run_index(const Common& common, const std::string& repo_root, const std::string& out_dir) {
    auto cfg = load_config(common);
    finalize_config(cfg);
    const auto embedder = make_embedder(cfg.pipeline.embedder);
    spdlog::info("indexing {}", repo_root);
    const auto repo = index_repository(repo_root, cfg.pipeline, *embedder);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());
    save_artifacts(repo, out_dir);
    write_file(fs::path(out_dir) / "repo.json",
               nlohmann::json{{"root", fs::weakly_canonical(repo_root).string()}, {"repo_name", repo.repo_name}}.dump() +
                   "\n");
    auto per_type = nlohmann::json::object();
    for (const auto& [id, n] : repo.graph.nodes()) {
        auto& slot = per_type[std::string(to_string(n.graph_type))];
        slot = slot.is_null() ? 1 : slot.get<int>() + 1;
    }
    spdlog::info("wrote {}", out_dir);
    print({{"repo_name", repo.repo_name},
           {"nodes", repo.graph.nodes().size()},
           {"edges", repo.graph.edges().size()},
           {"units", repo.indexes.catalog.size()},
           {"nodes_per_graph_type", per_type},
           {"diagnostics", repo.diagnostics.size()}});
    return kOk;
}

int run_retrieve(const Common& common, const Cursor& cursor, std::optional<std::size_t> k, bool explain) {
    auto l = load_for_cursor(common, cursor, "");
    if (k) l.cfg.pipeline.rerank.k = *k;
    const auto prepared = prepare_prompt(&l.repo, l.ctx, l.cfg.pipeline, *l.embedder);
    auto cands = nlohmann::json::array();
    for (const auto& c : prepared.candidates) cands.push_back(candidate_json(c, l.repo.indexes));
    nlohmann::json out = {{"variant", to_string(l.cfg.pipeline.variant)}, {"candidates", cands}};
    if (explain) {
        auto merged = nlohmann::json::array();
        for (const auto& c : prepared.trace.merged) merged.push_back(candidate_json(c, l.repo.indexes));
        out["explain"] = {{"alpha", prepared.trace.alpha},
                          {"semantic_hits", hits_json(prepared.trace.semantic_hits)},
                          {"structural_hits", hits_json(prepared.trace.structural_hits)},
                          {"merged", merged}};
    }
    print(out);
    return kOk;
}

int run_complete(const Common& common, const Cursor& cursor, const std::string& ablate, bool emit_prompt,
                 const std::string& dump_fusion, const std::optional<std::string>& groundtruth) {
    auto l = load_for_cursor(common, cursor, ablate);
    const auto prepared = prepare_prompt(&l.repo, l.ctx, l.cfg.pipeline, *l.embedder);
    if (!dump_fusion.empty()) {
        const auto dump = prepared.fusion ? fusion_dump(*prepared.fusion, l.cfg.pipeline.fusion.theta)
                                          : nlohmann::json{{"fused", false}};
        write_file(dump_fusion, dump.dump(2) + "\n");
    }
    if (emit_prompt) {
        std::cout << prepared.prompt.text;
        if (!prepared.prompt.text.empty() && prepared.prompt.text.back() != '\n') std::cout << "\n";
        return kOk;
    }
    const auto backend = make_backend(l.cfg.llm);
    const auto result = complete({cursor.file + ":" + std::to_string(cursor.line), prepared.prompt.text, groundtruth},
                                 *backend);
    auto diags = nlohmann::json::array();
    for (const auto& d : result.diagnostics) diags.push_back(d);
    print({{"completed_code", result.completed_code},
           {"explanation", result.explanation},
           {"confidence_score", result.confidence_score},
           {"referenced_nodes", result.referenced_nodes},
           {"diagnostics", diags}});
    return kOk;
}

int run_eval(const Common& common, const std::string& tasks_file, const std::vector<std::string>& variants,
             const std::string& report, const std::string& csv) {
    auto cfg = load_config(common);
    finalize_config(cfg);
    const auto tasks = load_tasks(tasks_file);
    const auto embedder = make_embedder(cfg.pipeline.embedder);
    const auto backend = make_backend(cfg.llm);
    std::vector<Variant> selected;
    if (variants.empty()) selected.push_back(cfg.pipeline.variant);
    for (const auto& v : variants) {
        if (v == "all") {
            selected = all_variants();
            break;
        }
        const auto var = variant_from_string(v);
        if (!var) throw ConfigError("unknown variant " + v);
        selected.push_back(*var);
    }
    std::vector<EvalMetrics> runs;
    auto out = nlohmann::json::array();
    for (const auto v : selected) {
        auto pcfg = cfg.pipeline;
        pcfg.variant = v;
        spdlog::info("evaluating {} tasks with {}", tasks.size(), to_string(v));
        runs.push_back(run_benchmark(tasks, pcfg, *backend, *embedder, cfg.eval));
        out.push_back(metrics_json(runs.back()));
        if (!report.empty()) {
            const auto path = selected.size() == 1 ? fs::path(report)
                                                   : fs::path(report + "." + std::string(to_string(v)) + ".jsonl");
            write_task_report(runs.back(), path);
        }
    }
    if (!csv.empty()) write_csv_summary(runs, csv);
    print(selected.size() == 1 ? out[0] : out);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("repograph"));
    spdlog::set_pattern("[%H:%M:%S.%e] %^%l%$ %v");

    CLI::App app{"Repository graph retrieval for code completion.\n" + std::string(kExitCodes)};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Debug logging on stderr");

    Common common;

    auto* index = app.add_subcommand("index", "Build the code graph and both indexes of a repository");
    std::string repo_root, out_dir;
    index->add_option("repo_root", repo_root, "Repository to index")->required();
    index->add_option("out_dir", out_dir, "Directory for the artifacts")->required();
    add_common(index, common);
    index->footer(config_help());

    auto* retrieve = app.add_subcommand("retrieve", "Rank repository subgraphs for a cursor position");
    Cursor cursor;
    std::optional<std::size_t> k;
    bool explain = false;
    add_cursor(retrieve, cursor);
    retrieve->add_option("-k,--k", k, "Candidates to return (default retriever.k)");
    retrieve->add_flag("--explain", explain, "Include the raw hits of both searches before merging");
    add_common(retrieve, common);
    retrieve->footer(config_help());

    auto* completion = app.add_subcommand("complete", "Predict the next line at a cursor position");
    Cursor ccursor;
    std::string ablate, dump_fusion;
    bool emit_prompt = false;
    std::optional<std::string> groundtruth;
    add_cursor(completion, ccursor);
    completion->add_option("--ablate", ablate, "Variant: full, no_fusion, bm25, ast_only, no_rag, vanilla_rag");
    completion->add_flag("--emit-prompt", emit_prompt, "Print the prompt instead of calling the backend");
    completion->add_option("--dump-fusion", dump_fusion, "Write attention weights and cross edges as JSON");
    completion->add_option("--groundtruth", groundtruth, "Reference line handed to mock backends");
    add_common(completion, common);
    completion->footer(config_help());

    auto* eval = app.add_subcommand("eval", "Run a benchmark task file and report metrics");
    std::string tasks_file, report, csv;
    std::vector<std::string> variants;
    eval->add_option("tasks", tasks_file, "JSONL task file")->required();
    eval->add_option("--variant", variants, "Variants to run, or `all` (default pipeline.variant)");
    eval->add_option("--report", report, "Per-task JSONL report path");
    eval->add_option("--csv", csv, "Summary CSV path");
    add_common(eval, common);
    eval->footer(config_help());

    auto* config = app.add_subcommand("config", "Configuration commands");
    config->require_subcommand(1);
    auto* show = config->add_subcommand("show", "Print the effective configuration as JSON");
    add_common(show, common);
    show->footer(config_help());

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

    try {
        if (*index) return run_index(common, repo_root, out_dir);
        if (*retrieve) return run_retrieve(common, cursor, k, explain);
        if (*completion) return run_complete(common, ccursor, ablate, emit_prompt, dump_fusion, groundtruth);
        if (*eval) return run_eval(common, tasks_file, variants, report, csv);
        if (*show) {
            print(config_json(load_config(common)));
            return kOk;
        }
    } catch (const ConfigError& e) {
        spdlog::error("{}", e.what());
        return kUsage;
    } catch (const IoError& e) {
        spdlog::error("{}", e.what());
        return kIo;
    } catch (const DecodeError& e) {
        spdlog::error("{}", e.what());
        return kIo;
    } catch (const EmptyCorpusError& e) {
        spdlog::error("{}", e.what());
        return kEmptyCorpus;
    } catch (const CursorError& e) {
        spdlog::error("{}", e.what());
        return kCursor;
    } catch (const TransportError& e) {
        spdlog::error("completion backend failed: {}", e.what());
        return kBackend;
    } catch (const nlohmann::json::exception& e) {
        spdlog::error("{}", e.what());
        return kIo;
    }
    return kUsage;
}
