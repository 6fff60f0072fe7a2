#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "repograph/embed/embedder.hpp"
#include "repograph/graph/code_graph.hpp"
#include "repograph/graph/diagnostics.hpp"
#include "repograph/kernels/kernels.hpp"

namespace repograph {

using SubgraphId = std::uint32_t;

struct SearchHit {
    SubgraphId id;
    double score;  // cosine similarity
};

struct HnswParams {
    std::size_t m = 32;
    std::size_t ef_construction = 200;
    std::size_t ef_search = 256;
    std::uint64_t seed = 42;
};

/// Approximate nearest-neighbour index (hierarchical navigable small world graph)
/// over cosine similarity. Vectors are stored L2-normalized; zero vectors stay zero
/// and score 0 against everything.
class HnswIndex {
public:
    explicit HnswIndex(std::size_t dim = 0, HnswParams params = {});

    /// Inserts a vector. Ids must be unique. Construction is deterministic given the seed
    /// and the insertion order.
    void add(SubgraphId id, std::span<const float> vector);

    /// Up to k hits, descending score, ties by ascending id. Searches with
    /// max(ef_search, k) candidates.
    std::vector<SearchHit> search(std::span<const float> query, std::size_t k) const;

    std::size_t size() const { return ids_.size(); }
    std::size_t dim() const { return dim_; }
    const HnswParams& params() const { return params_; }
    /// Stored (normalized) vector of an id.
    std::optional<std::span<const float>> vector_of(SubgraphId id) const;

    void save(const std::filesystem::path& path) const;
    static HnswIndex load(const std::filesystem::path& path);

private:
    using Internal = std::uint32_t;
    struct Candidate {
        double dist;
        Internal node;
    };

    std::span<const float> vec(Internal i) const { return {vectors_.data() + std::size_t(i) * dim_, dim_}; }
    double distance(std::span<const float> q, Internal i) const;
    std::vector<Candidate> search_layer(std::span<const float> q, Internal entry, std::size_t ef,
                                        std::size_t level) const;
    std::vector<Internal> select_neighbors(std::span<const float> q, std::vector<Candidate> candidates,
                                           std::size_t m) const;
    std::size_t max_links(std::size_t level) const { return level == 0 ? 2 * params_.m : params_.m; }
    std::size_t random_level();

    std::size_t dim_;
    HnswParams params_;
    std::uint64_t rng_state_;
    std::vector<SubgraphId> ids_;
    std::vector<float> vectors_;
    std::vector<std::vector<std::vector<Internal>>> links_;  // node -> level -> neighbours
    std::map<SubgraphId, Internal> by_id_;
    std::optional<Internal> entry_;
    std::size_t top_level_ = 0;
};

/// Exact cosine search by brute force.
class FlatIndex {
public:
    explicit FlatIndex(std::size_t dim = 0) : dim_(dim) {}

    void add(SubgraphId id, std::span<const float> vector);
    std::vector<SearchHit> search(std::span<const float> query, std::size_t k,
                                  kernels::Exec exec = kernels::Exec::Parallel) const;

    std::size_t size() const { return ids_.size(); }
    std::size_t dim() const { return dim_; }
    std::optional<std::span<const float>> vector_of(SubgraphId id) const;

    void save(const std::filesystem::path& path) const;
    static FlatIndex load(const std::filesystem::path& path);

private:
    std::size_t dim_;
    std::vector<SubgraphId> ids_;
    std::vector<float> vectors_;
    std::map<SubgraphId, std::size_t> by_id_;
};

// ---------------------------------------------------------------------------------------
// Subgraph units

struct SubgraphUnit {
    SubgraphId subgraph_id = 0;
    NodeId anchor;                // a Function node
    std::vector<NodeId> node_ids; // breadth-first: by hop, then NodeId
    std::string source_digest;    // sha256 of the unit's code text
    std::string file_path;
    std::string name;

    bool operator==(const SubgraphUnit&) const = default;
};

struct UnitOptions {
    std::size_t hops = 2;
    std::size_t node_cap = 200;
    std::set<EdgeType> edge_types = {EdgeType::Calls,    EdgeType::AstChild, EdgeType::ControlFlow,
                                     EdgeType::DataFlow, EdgeType::Inherits, EdgeType::TypeUses,
                                     EdgeType::AnchorsAst};
};

/// One unit per Function node, ids assigned in NodeId order of the anchors.
std::vector<SubgraphUnit> build_subgraph_units(const CodeGraph& graph, const UnitOptions& options = {});

/// Sources of the Function members, anchor first, separated by blank lines.
std::string unit_code_text(const CodeGraph& graph, const SubgraphUnit& unit);

void save_catalog(const std::vector<SubgraphUnit>& units, const std::filesystem::path& path);
std::vector<SubgraphUnit> load_catalog(const std::filesystem::path& path);

// ---------------------------------------------------------------------------------------
// Index build

struct IndexOptions {
    UnitOptions units;
    HnswParams hnsw;
    std::size_t pe_dim = kDefaultPeDim;
    bool parallel = true;
};

struct IndexSet {
    std::vector<SubgraphUnit> catalog;
    std::size_t pe_dim = kDefaultPeDim;
    HnswIndex semantic;
    FlatIndex structural;
    Diagnostics diagnostics;

    const SubgraphUnit* unit(SubgraphId id) const;
};

/// Embeds every unit (semantic: its code text; structural: pooled graph embedding) and
/// indexes both. Units whose embedding fails are skipped with a diagnostic.
IndexSet build_indexes(const CodeGraph& graph, const TextEmbedder& embedder,
                       const IndexOptions& options = {});

/// Writes semantic.idx, structural.idx, catalog.jsonl, diagnostics.jsonl and manifest.json.
void save_index_set(const IndexSet& set, const std::filesystem::path& dir);
IndexSet load_index_set(const std::filesystem::path& dir);

}  // namespace repograph
