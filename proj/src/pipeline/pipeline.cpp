#include "repograph/pipeline/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "repograph/graph/graph_store.hpp"

namespace repograph {

namespace {

constexpr std::array<std::pair<Variant, std::string_view>, 6> kVariantNames = {{
    {Variant::Full, "full"},
    {Variant::NoFusion, "no_fusion"},
    {Variant::Bm25, "bm25"},
    {Variant::AstOnly, "ast_only"},
    {Variant::NoRag, "no_rag"},
    {Variant::VanillaRag, "vanilla_rag"},
}};

bool uses_vector_retrieval(Variant v) {
    return v == Variant::Full || v == Variant::NoFusion || v == Variant::AstOnly;
}

bool uses_fusion(Variant v) { return v == Variant::Full || v == Variant::Bm25 || v == Variant::AstOnly; }

void build_lexical(IndexedRepo& repo, const PipelineConfig& cfg) {
    const auto& frontend = default_frontend();
    for (const auto& u : repo.indexes.catalog) {
        repo.bm25.add(u.subgraph_id, word_tokens(frontend, unit_code_text(repo.graph, u)));
    }
    repo.windows = sliding_windows(repo.graph, cfg.window_lines, cfg.window_stride);
    for (const auto& w : repo.windows) {
        const auto toks = word_tokens(frontend, w.text);
        repo.window_tokens.emplace_back(toks.begin(), toks.end());
    }
}

std::set<SubgraphId> units_in_file(const IndexSet& set, const std::string& file_path) {
    std::set<SubgraphId> out;
    for (const auto& u : set.catalog) {
        if (u.file_path == file_path) out.insert(u.subgraph_id);
    }
    return out;
}

}  // namespace

std::string_view to_string(Variant v) {
    for (const auto& [k, name] : kVariantNames) {
        if (k == v) return name;
    }
    return "full";
}

std::optional<Variant> variant_from_string(std::string_view s) {
    for (const auto& [k, name] : kVariantNames) {
        if (name == s) return k;
    }
    return std::nullopt;
}

const std::vector<Variant>& all_variants() {
    static const std::vector<Variant> v = {Variant::Full,    Variant::NoFusion, Variant::Bm25,
                                           Variant::AstOnly, Variant::NoRag,    Variant::VanillaRag};
    return v;
}

IndexedRepo index_repository(const std::filesystem::path& root, const PipelineConfig& cfg,
                             const TextEmbedder& embedder) {
    BuildOptions bopts;
    bopts.parallel = cfg.parallel;
    bopts.ast_only = cfg.variant == Variant::AstOnly;
    auto built = build_code_graph(root, bopts);
    IndexedRepo repo;
    repo.repo_name = built.graph.repo_name;
    repo.graph = std::move(built.graph);
    IndexOptions iopts;
    iopts.units = cfg.units;
    iopts.hnsw = cfg.hnsw;
    iopts.pe_dim = cfg.pe_dim;
    iopts.parallel = cfg.parallel;
    repo.indexes = build_indexes(repo.graph, embedder, iopts);
    repo.diagnostics = std::move(built.diagnostics);
    repo.diagnostics.insert(repo.diagnostics.end(), repo.indexes.diagnostics.begin(), repo.indexes.diagnostics.end());
    sort_diagnostics(repo.diagnostics);
    build_lexical(repo, cfg);
    return repo;
}

void save_artifacts(const IndexedRepo& repo, const std::filesystem::path& dir) {
    save_index_set(repo.indexes, dir);
    save_graph(repo.graph, dir / "graph.jsonl");
    write_diagnostics(dir / "diagnostics.jsonl", repo.diagnostics);
}

IndexedRepo load_artifacts(const std::filesystem::path& dir, const PipelineConfig& cfg) {
    IndexedRepo repo;
    repo.graph = load_graph(dir / "graph.jsonl");
    repo.repo_name = repo.graph.repo_name;
    repo.indexes = load_index_set(dir);
    repo.diagnostics = repo.indexes.diagnostics;
    build_lexical(repo, cfg);
    return repo;
}

QueryVectors query_vectors(const QueryGraph& q, const TextEmbedder& embedder, std::size_t pe_dim) {
    QueryVectors v;
    const bool blank = std::all_of(q.snippet.begin(), q.snippet.end(),
                                   [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
    v.semantic = blank ? std::vector<float>(embedder.dim(), 0.0f) : embedder.embed(q.snippet).values;
    const auto emb = embed_graph(q.graph, embedder, pe_dim);
    v.structural.assign(emb.pooled.begin(), emb.pooled.end());
    return v;
}

PreparedPrompt prepare_prompt(const IndexedRepo* repo, const QueryContext& ctx, const PipelineConfig& cfg,
                              const TextEmbedder& embedder) {
    PreparedPrompt out;
    QueryGraphOptions qopts;
    qopts.ast_only = cfg.variant == Variant::AstOnly;
    out.query = build_query_graph(ctx, qopts);

    const bool rag = repo && cfg.variant != Variant::NoRag;
    std::set<SubgraphId> exclude;
    if (rag && cfg.exclude_current_file) exclude = units_in_file(repo->indexes, ctx.file_path);

    if (rag && uses_vector_retrieval(cfg.variant)) {
        out.vectors = query_vectors(out.query, embedder, repo->indexes.pe_dim);
        auto rerank = cfg.rerank;
        rerank.exclude.insert(exclude.begin(), exclude.end());
        out.candidates = retrieve(out.vectors, repo->indexes, rerank, &out.trace);
    } else if (rag && cfg.variant == Variant::Bm25) {
        const auto hits = repo->bm25.search(word_tokens(default_frontend(), out.query.snippet), cfg.rerank.k, exclude);
        for (const auto& h : hits) out.candidates.push_back({h.id, 0.0, 0.0, h.score, Origin::Lexical});
        out.trace.semantic_hits = hits;
    }

    PromptInput input;
    input.repo_name = repo ? repo->repo_name : ctx.repo_name;
    input.file_path = ctx.file_path;
    input.code_before_cursor = out.query.prefix;
    input.include_graph_section = cfg.variant != Variant::NoFusion && cfg.variant != Variant::VanillaRag;

    if (rag && cfg.variant == Variant::VanillaRag) {
        const auto toks = word_tokens(default_frontend(), out.query.snippet);
        const std::set<std::string> q(toks.begin(), toks.end());
        std::vector<std::pair<double, std::size_t>> scored;
        for (std::size_t i = 0; i < repo->windows.size(); ++i) {
            if (cfg.exclude_current_file && repo->windows[i].file_path == ctx.file_path) continue;
            const double s = jaccard(q, repo->window_tokens[i]);
            if (s > 0.0) scored.emplace_back(-s, i);
        }
        std::sort(scored.begin(), scored.end());
        for (std::size_t r = 0; r < std::min(cfg.rerank.k, scored.size()); ++r) {
            const auto& w = repo->windows[scored[r].second];
            input.snippets.push_back({static_cast<SubgraphId>(scored[r].second), w.file_path,
                                      "lines " + std::to_string(w.start_line) + "-" + std::to_string(w.end_line),
                                      w.text, -scored[r].first});
        }
    }

    std::vector<RetrievedGraph> retrieved;
    for (const auto& c : out.candidates) {
        const auto* found = repo->indexes.unit(c.subgraph_id);
        if (!found) continue;
        auto unit = *found;
        if (cfg.exclude_current_file) {
            std::erase_if(unit.node_ids, [&](const NodeId& id) {
                const auto* n = repo->graph.find(id);
                return n && n->file_path == ctx.file_path;
            });
        }
        input.snippets.push_back({c.subgraph_id, unit.file_path, unit.name, unit_code_text(repo->graph, unit), c.score});
        if (uses_fusion(cfg.variant)) {
            retrieved.push_back({c.subgraph_id, c.score, induced_subgraph(repo->graph, unit.node_ids)});
        }
    }
    if (rag && uses_fusion(cfg.variant) && !retrieved.empty()) {
        auto fcfg = cfg.fusion;
        fcfg.pe_dim = repo->indexes.pe_dim;
        out.fusion = fuse(out.query.graph, retrieved, embedder, fcfg);
        input.graph = &out.fusion->fused.graph;
    }
    out.snippets = input.snippets;
    out.prompt = build_prompt(input, cfg.budget, cfg.tokens);
    return out;
}

}  // namespace repograph
