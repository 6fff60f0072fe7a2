#include <algorithm>
#include <cctype>
#include <fstream>

#include <json.hpp>

#include "repograph/core/errors.hpp"
#include "repograph/index/index.hpp"

namespace repograph {

namespace {

constexpr int kManifestVersion = 1;

bool blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

Diagnostic unit_diagnostic(const SubgraphUnit& u, const std::string& message) {
    return {u.file_path, 0, "embedding_failed", u.name + ": " + message};
}

}  // namespace

const SubgraphUnit* IndexSet::unit(SubgraphId id) const {
    const auto it = std::lower_bound(catalog.begin(), catalog.end(), id,
                                     [](const SubgraphUnit& u, SubgraphId v) { return u.subgraph_id < v; });
    return it != catalog.end() && it->subgraph_id == id ? &*it : nullptr;
}

IndexSet build_indexes(const CodeGraph& graph, const TextEmbedder& embedder, const IndexOptions& options) {
    const std::size_t ds = embedder.dim();
    IndexSet set{{}, options.pe_dim, HnswIndex(ds, options.hnsw), FlatIndex(ds + options.pe_dim), {}};
    auto units = build_subgraph_units(graph, options.units);
    if (units.empty()) {
        set.diagnostics.push_back({graph.repo_name, 0, "no_functions", "repository has no functions to index"});
        return set;
    }
    const Adjacency adj(graph);
    const auto n = units.size();
    std::vector<std::string> texts(n);
    for (std::size_t i = 0; i < n; ++i) texts[i] = unit_code_text(graph, units[i]);

    std::vector<std::optional<std::vector<float>>> semantic(n);
    std::vector<std::string> failure(n);
    std::vector<std::string> batch;
    std::vector<std::size_t> batch_units;
    for (std::size_t i = 0; i < n; ++i) {
        if (blank(texts[i])) {
            failure[i] = "empty code text";
            continue;
        }
        batch.push_back(texts[i]);
        batch_units.push_back(i);
    }
    try {
        auto vecs = embedder.embed_batch(batch);
        for (std::size_t b = 0; b < batch_units.size(); ++b) semantic[batch_units[b]] = std::move(vecs[b].values);
    } catch (const std::exception&) {
        for (auto i : batch_units) {
            try {
                semantic[i] = embedder.embed(texts[i]).values;
            } catch (const std::exception& e) {
                failure[i] = e.what();
            }
        }
    }

    NodeVectorCache cache(embedder);
    {
        std::set<NodeId> members;
        for (const auto& u : units) members.insert(u.node_ids.begin(), u.node_ids.end());
        std::vector<const GraphNode*> nodes;
        for (const auto& id : members) nodes.push_back(graph.find(id));
        try {
            cache.lookup(nodes);
        } catch (const std::exception&) {
            // per-unit lookups below retry and attribute failures
        }
    }
    std::vector<std::vector<float>> structural(n);
#pragma omp parallel for schedule(dynamic) if (options.parallel)
    for (std::size_t i = 0; i < n; ++i) {
        if (!semantic[i]) continue;
        try {
            const auto sub = induced_subgraph(graph, adj, units[i].node_ids);
            const auto emb = embed_graph(sub, embedder, options.pe_dim, &cache);
            structural[i].assign(emb.pooled.begin(), emb.pooled.end());
        } catch (const std::exception& e) {
            failure[i] = e.what();
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (!semantic[i] || structural[i].empty()) {
            set.diagnostics.push_back(unit_diagnostic(units[i], failure[i].empty() ? "unknown error" : failure[i]));
            continue;
        }
        set.semantic.add(units[i].subgraph_id, *semantic[i]);
        set.structural.add(units[i].subgraph_id, structural[i]);
        set.catalog.push_back(std::move(units[i]));
    }
    sort_diagnostics(set.diagnostics);
    return set;
}

void save_index_set(const IndexSet& set, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    set.semantic.save(dir / "semantic.idx");
    set.structural.save(dir / "structural.idx");
    save_catalog(set.catalog, dir / "catalog.jsonl");
    write_diagnostics(dir / "diagnostics.jsonl", set.diagnostics);
    const auto& p = set.semantic.params();
    const nlohmann::json manifest{{"format_version", kManifestVersion},
                                  {"units", set.catalog.size()},
                                  {"semantic_dim", set.semantic.dim()},
                                  {"structural_dim", set.structural.dim()},
                                  {"pe_dim", set.pe_dim},
                                  {"hnsw", {{"m", p.m}, {"ef_construction", p.ef_construction},
                                            {"ef_search", p.ef_search}, {"seed", p.seed}}}};
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    out << manifest.dump(2) << '\n';
    if (!out) throw IoError("write failed for " + (dir / "manifest.json").string());
}

IndexSet load_index_set(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json", std::ios::binary);
    if (!in) throw IoError("cannot read " + (dir / "manifest.json").string());
    IndexSet set;
    try {
        const auto m = nlohmann::json::parse(in);
        if (m.at("format_version").get<int>() != kManifestVersion) throw DecodeError("manifest: unsupported version");
        set.pe_dim = m.at("pe_dim").get<std::size_t>();
        set.semantic = HnswIndex::load(dir / "semantic.idx");
        set.structural = FlatIndex::load(dir / "structural.idx");
        set.catalog = load_catalog(dir / "catalog.jsonl");
        if (std::filesystem::exists(dir / "diagnostics.jsonl")) set.diagnostics = read_diagnostics(dir / "diagnostics.jsonl");
        if (set.structural.dim() != set.semantic.dim() + set.pe_dim ||
            set.semantic.size() != set.catalog.size() || set.structural.size() != set.catalog.size()) {
            throw DecodeError("index directory is inconsistent");
        }
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(std::string("manifest: ") + e.what());
    }
    return set;
}

}  // namespace repograph
