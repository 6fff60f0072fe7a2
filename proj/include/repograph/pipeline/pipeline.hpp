#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "repograph/embed/embedder.hpp"
#include "repograph/fusion/fusion.hpp"
#include "repograph/graph/builder.hpp"
#include "repograph/index/index.hpp"
#include "repograph/prompt/prompt.hpp"
#include "repograph/retrieval/lexical.hpp"
#include "repograph/retrieval/retriever.hpp"

namespace repograph {

/// Pipeline configurations compared in evaluation.
enum class Variant {
    Full,        // hybrid retrieval, fusion, graph triples
    NoFusion,    // hybrid retrieval, retrieved code only
    Bm25,        // BM25 over function snippets instead of the hybrid retriever
    AstOnly,     // graphs restricted to the syntactic skeleton
    NoRag,       // local context only
    VanillaRag,  // sliding-window lexical retrieval, retrieved code only
};

std::string_view to_string(Variant v);
std::optional<Variant> variant_from_string(std::string_view s);
const std::vector<Variant>& all_variants();

struct PipelineConfig {
    EmbedderConfig embedder;
    std::size_t pe_dim = kDefaultPeDim;
    HnswParams hnsw;
    UnitOptions units;
    RerankConfig rerank;
    FusionConfig fusion;
    PromptBudget budget;
    TokenCounter tokens;
    std::size_t window_lines = 20;
    std::size_t window_stride = 10;
    bool exclude_current_file = true;
    bool parallel = true;
    Variant variant = Variant::Full;
};

/// A repository with its graph, vector indexes and lexical structures.
struct IndexedRepo {
    std::string repo_name;
    CodeGraph graph;
    IndexSet indexes;
    Diagnostics diagnostics;
    Bm25Index bm25;
    std::vector<CodeWindow> windows;
    std::vector<std::set<std::string>> window_tokens;
};

IndexedRepo index_repository(const std::filesystem::path& root, const PipelineConfig& cfg,
                             const TextEmbedder& embedder);

/// Writes graph.jsonl and the index set into `dir`.
void save_artifacts(const IndexedRepo& repo, const std::filesystem::path& dir);
IndexedRepo load_artifacts(const std::filesystem::path& dir, const PipelineConfig& cfg);

struct PreparedPrompt {
    QueryGraph query;
    QueryVectors vectors;
    std::vector<RetrievedCandidate> candidates;
    RetrievalTrace trace;
    std::optional<FusionResult> fusion;
    std::vector<RetrievedSnippet> snippets;
    Prompt prompt;
};

/// Query graph, retrieval, fusion and prompt assembly for one cursor. `repo` may be
/// null for the NoRag variant.
PreparedPrompt prepare_prompt(const IndexedRepo* repo, const QueryContext& ctx, const PipelineConfig& cfg,
                              const TextEmbedder& embedder);

/// Semantic and structural query vectors of a query graph.
QueryVectors query_vectors(const QueryGraph& q, const TextEmbedder& embedder, std::size_t pe_dim);

}  // namespace repograph
