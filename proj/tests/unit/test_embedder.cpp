#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "repograph/core/errors.hpp"
#include "repograph/core/vector_math.hpp"
#include "repograph/embed/embedder.hpp"

using namespace repograph;

namespace {

CodeGraph graph_of(const std::vector<std::pair<std::string, std::string>>& nodes,
                   const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    CodeGraph g;
    std::vector<NodeId> ids;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        GraphNode n;
        n.id = NodeId::derive(nodes[i].first, "ast.Name", i, i + 1);
        n.node_type = NodeType::Expression;
        n.graph_type = GraphType::Ast;
        n.code_text = nodes[i].second;
        n.file_path = "x.py";
        ids.push_back(n.id);
        g.add_node(std::move(n));
    }
    for (const auto& [a, b] : edges) g.add_edge({ids[a], ids[b], EdgeType::AstChild, 1.0, std::nullopt});
    return g;
}

}  // namespace

TEST_SUITE("embedder") {

TEST_CASE("deterministic backend is pure") {
    HashingEmbedder e;
    const auto a = e.embed("def area(self):\n    return self.w * self.h");
    const auto b = e.embed("def area(self):\n    return self.w * self.h");
    CHECK(a.values == b.values);
    CHECK(a.source_digest == b.source_digest);
    CHECK(a.values.size() == kDefaultSemanticDim);
    CHECK(cosine<float, float>(a.values, a.values) == doctest::Approx(1.0).epsilon(1e-12));
    for (float v : a.values) CHECK(std::isfinite(v));
}

TEST_CASE("disjoint token sets are orthogonal") {
    HashingEmbedder e(64);
    const std::string a = "alpha beta";
    const std::string b = "gamma delta";
    // Oracle: the features collide only if two of the four names share a bucket.
    const bool collide = e.bucket("alpha") == e.bucket("gamma") || e.bucket("alpha") == e.bucket("delta") ||
                         e.bucket("beta") == e.bucket("gamma") || e.bucket("beta") == e.bucket("delta");
    REQUIRE_FALSE(collide);
    CHECK(cosine<float, float>(e.embed(a).values, e.embed(b).values) == 0.0);
}

TEST_CASE("hand-computed overlap") {
    HashingEmbedder e(4096);
    // a: {x: 2, y: 1}, b: {x: 1}; weights log(1 + tf)
    const auto va = e.embed("x x y").values;
    const auto vb = e.embed("x").values;
    REQUIRE(e.bucket("x") != e.bucket("y"));
    const double wx = std::log(3.0), wy = std::log(2.0);
    CHECK(cosine<float, float>(va, vb) == doctest::Approx(wx / std::sqrt(wx * wx + wy * wy)).epsilon(1e-6));
}

TEST_CASE("blank snippets are rejected") {
    HashingEmbedder e;
    CHECK_THROWS_AS(e.embed("   \n\t"), std::invalid_argument);
}

TEST_CASE("remote backend speaks the wire format") {
    EmbedderConfig cfg;
    cfg.kind = EmbedderKind::Remote;
    cfg.endpoint = "http://embed.test";
    cfg.dim = 3;
    std::vector<std::string> urls;
    RemoteEmbedder good(cfg, [&](const HttpRequest& r) {
        urls.push_back(r.url);
        const auto body = nlohmann::json::parse(r.body);
        nlohmann::json vectors = nlohmann::json::array();
        for (std::size_t i = 0; i < body["texts"].size(); ++i) vectors.push_back({1.0, 0.0, double(i)});
        return HttpResponse{200, nlohmann::json{{"vectors", vectors}, {"dim", 3}}.dump()};
    });
    const auto out = good.embed_batch({"a", "b"});
    REQUIRE(out.size() == 2);
    CHECK(out[1].values == std::vector<float>{1.0f, 0.0f, 1.0f});
    CHECK(urls.front() == "http://embed.test/embed");

    RemoteEmbedder down(cfg, [](const HttpRequest&) -> HttpResponse { return {503, "busy"}; });
    CHECK_THROWS_AS(down.embed_batch({"a"}), TransportError);

    RemoteEmbedder wrong_dim(cfg, [](const HttpRequest&) {
        return HttpResponse{200, R"({"vectors": [[1, 2]], "dim": 2})"};
    });
    CHECK_THROWS_AS(wrong_dim.embed_batch({"a"}), ConfigError);
}

TEST_CASE("single-node graph pools to its own row") {
    HashingEmbedder e(32);
    const auto g = graph_of({{"a", "value"}}, {});
    const auto emb = embed_graph(g, e, 4);
    REQUIRE(emb.node_vectors.rows == 1);
    CHECK(emb.node_vectors.cols == 36);
    for (std::size_t c = 0; c < 36; ++c) CHECK(emb.pooled[c] == emb.node_vectors(0, c));
    // no non-zero eigenvalue: the positional part is padding
    for (std::size_t c = 32; c < 36; ++c) CHECK(emb.pooled[c] == 0.0);
}

TEST_CASE("pooling is invariant to relabelling") {
    HashingEmbedder e(32);
    // path a - b - c with symmetric texts, built under two different id assignments
    const auto g1 = graph_of({{"p", "left"}, {"q", "mid"}, {"r", "right"}}, {{0, 1}, {1, 2}});
    const auto g2 = graph_of({{"z", "right"}, {"y", "mid"}, {"x", "left"}}, {{0, 1}, {1, 2}});
    const auto a = embed_graph(g1, e, 2).pooled;
    const auto b = embed_graph(g2, e, 2).pooled;
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-9));
}

TEST_CASE("node cache reuses vectors") {
    HashingEmbedder e(32);
    NodeVectorCache cache(e);
    const auto g = graph_of({{"a", "same"}, {"b", "same"}, {"c", "other"}}, {{0, 1}});
    const auto with = embed_graph(g, e, 2, &cache);
    const auto without = embed_graph(g, e, 2);
    CHECK(with.pooled == without.pooled);
}

}
