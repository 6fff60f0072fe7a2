#include <doctest.h>

#include <set>

#include "fixtures.hpp"
#include "repograph/core/errors.hpp"
#include "repograph/graph/builder.hpp"
#include "repograph/index/index.hpp"

using namespace repograph;

namespace {

std::vector<std::vector<float>> random_rows(std::size_t n, std::size_t dim, std::uint64_t seed) {
    std::vector<std::vector<float>> rows;
    for (std::size_t i = 0; i < n; ++i) rows.push_back(fixtures::random_vector(dim, seed));
    return rows;
}

}  // namespace

TEST_SUITE("index") {

TEST_CASE("exact match scores one and k beyond the size returns everything") {
    HnswIndex idx(8);
    const auto rows = random_rows(20, 8, 1);
    for (std::size_t i = 0; i < rows.size(); ++i) idx.add(static_cast<SubgraphId>(i), rows[i]);
    const auto hits = idx.search(rows[7], 1);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].id == 7);
    CHECK(hits[0].score == doctest::Approx(1.0).epsilon(1e-6));
    const auto all = idx.search(rows[0], 100);
    CHECK(all.size() == 20);
    for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].score >= all[i].score);
    CHECK(HnswIndex(8).search(rows[0], 5).empty());
}

TEST_CASE("duplicate ids and wrong dimensions are rejected") {
    HnswIndex idx(4);
    idx.add(1, std::vector<float>{1, 0, 0, 0});
    CHECK_THROWS(idx.add(1, std::vector<float>{0, 1, 0, 0}));
    CHECK_THROWS(idx.add(2, std::vector<float>{0, 1, 0}));
}

TEST_CASE("orthogonal query scores zero and scaling is invisible") {
    FlatIndex flat(3);
    flat.add(0, std::vector<float>{1, 0, 0});
    flat.add(1, std::vector<float>{0, 2, 0});
    const auto hits = flat.search(std::vector<float>{0, 0, 5}, 2);
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].score == 0.0);
    CHECK(hits[0].id == 0);

    HnswIndex h(3);
    h.add(0, std::vector<float>{1, 1, 0});
    h.add(1, std::vector<float>{0, 1, 1});
    const auto a = h.search(std::vector<float>{1, 2, 0}, 2);
    const auto b = h.search(std::vector<float>{10, 20, 0}, 2);
    CHECK(a[0].id == b[0].id);
    CHECK(a[0].score == doctest::Approx(b[0].score));
}

TEST_CASE("flat search equals the brute-force oracle") {
    const auto rows = random_rows(400, 16, 3);
    FlatIndex flat(16);
    for (std::size_t i = 0; i < rows.size(); ++i) flat.add(static_cast<SubgraphId>(i), rows[i]);
    std::uint64_t s = 77;
    for (int q = 0; q < 10; ++q) {
        const auto query = fixtures::random_vector(16, s);
        const auto want = fixtures::brute_ranking(rows, query);
        const auto got = flat.search(query, 10);
        for (std::size_t i = 0; i < 10; ++i) {
            CHECK(got[i].id == want[i].first);
            CHECK(got[i].score == doctest::Approx(want[i].second).epsilon(1e-9));
        }
    }
}

TEST_CASE("hnsw recall at 10 against brute force") {
    const auto rows = random_rows(2000, 32, 5);
    HnswIndex idx(32);
    for (std::size_t i = 0; i < rows.size(); ++i) idx.add(static_cast<SubgraphId>(i), rows[i]);
    std::uint64_t s = 123;
    std::size_t found = 0, total = 0;
    for (int q = 0; q < 50; ++q) {
        const auto query = fixtures::random_vector(32, s);
        const auto want = fixtures::brute_ranking(rows, query);
        std::set<SubgraphId> truth;
        for (std::size_t i = 0; i < 10; ++i) truth.insert(static_cast<SubgraphId>(want[i].first));
        for (const auto& h : idx.search(query, 10)) found += truth.count(h.id);
        total += 10;
    }
    CHECK(static_cast<double>(found) / static_cast<double>(total) >= 0.95);
}

TEST_CASE("hnsw top-10 equals exact search on most queries over 1k vectors") {
    const auto rows = random_rows(1000, 32, 11);
    HnswIndex idx(32);
    for (std::size_t i = 0; i < rows.size(); ++i) idx.add(static_cast<SubgraphId>(i), rows[i]);
    std::uint64_t s = 321;
    int exact = 0;
    for (int q = 0; q < 100; ++q) {
        const auto query = fixtures::random_vector(32, s);
        const auto want = fixtures::brute_ranking(rows, query);
        std::set<SubgraphId> truth, got;
        for (std::size_t i = 0; i < 10; ++i) truth.insert(static_cast<SubgraphId>(want[i].first));
        for (const auto& h : idx.search(query, 10)) got.insert(h.id);
        exact += truth == got;
    }
    CHECK(exact >= 95);
}

TEST_CASE("save and load keep search results") {
    fixtures::TempDir dir;
    const auto rows = random_rows(300, 12, 9);
    HnswIndex idx(12);
    FlatIndex flat(12);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        idx.add(static_cast<SubgraphId>(i * 3), rows[i]);
        flat.add(static_cast<SubgraphId>(i * 3), rows[i]);
    }
    idx.save(dir / "h.idx");
    flat.save(dir / "f.idx");
    const auto h2 = HnswIndex::load(dir / "h.idx");
    const auto f2 = FlatIndex::load(dir / "f.idx");
    std::uint64_t s = 4;
    for (int q = 0; q < 5; ++q) {
        const auto query = fixtures::random_vector(12, s);
        const auto a = idx.search(query, 10), b = h2.search(query, 10);
        const auto c = flat.search(query, 10), d = f2.search(query, 10);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].id == b[i].id);
            CHECK(a[i].score == b[i].score);
            CHECK(c[i].id == d[i].id);
        }
    }
    fixtures::write_file(dir.path(), "bad.idx", "nonsense");
    CHECK_THROWS_AS(HnswIndex::load(dir / "bad.idx"), DecodeError);
}

TEST_CASE("one unit per function within the hop and cap limits") {
    fixtures::TempDir dir;
    fixtures::write_file(dir / "repo", "m.py",
                         "def a():\n    return b()\n\n"
                         "def b():\n    return c()\n\n"
                         "def c():\n    return d()\n\n"
                         "def d():\n    return e()\n\n"
                         "def e():\n    return 1\n");
    const auto g = build_code_graph(dir / "repo").graph;
    const auto units = build_subgraph_units(g);
    REQUIRE(units.size() == 5);
    for (std::size_t i = 0; i < units.size(); ++i) {
        CHECK(units[i].subgraph_id == i);
        CHECK(units[i].node_ids.front() == units[i].anchor);
        CHECK(g.find(units[i].anchor)->node_type == NodeType::Function);
    }
    // within two Calls hops of a: a, b, c but not d
    const auto& ua = *std::find_if(units.begin(), units.end(), [&](const SubgraphUnit& u) { return u.name == "a"; });
    std::set<std::string> fn_names;
    for (const auto& id : ua.node_ids) {
        if (g.find(id)->node_type == NodeType::Function) fn_names.insert(g.find(id)->name);
    }
    CHECK(fn_names == std::set<std::string>{"a", "b", "c"});

    UnitOptions tiny;
    tiny.node_cap = 3;
    for (const auto& u : build_subgraph_units(g, tiny)) CHECK(u.node_ids.size() <= 3);

    const auto text = unit_code_text(g, ua);
    CHECK(text.rfind("def a():", 0) == 0);
    CHECK(text.find("def c():") != std::string::npos);
}

TEST_CASE("index set round trip") {
    fixtures::TempDir dir;
    fixtures::ten_file_repo(dir / "repo");
    const auto g = build_code_graph(dir / "repo").graph;
    HashingEmbedder e;
    const auto set = build_indexes(g, e);
    CHECK(set.catalog.size() == 9);
    CHECK(set.semantic.size() == 9);
    CHECK(set.structural.size() == 9);
    save_index_set(set, dir / "idx");
    const auto back = load_index_set(dir / "idx");
    CHECK(back.catalog == set.catalog);
    CHECK(back.pe_dim == set.pe_dim);
    const auto q = *set.semantic.vector_of(0);
    CHECK(back.semantic.search(q, 3)[0].id == set.semantic.search(q, 3)[0].id);
    CHECK_THROWS_AS(load_index_set(dir / "nothing"), IoError);
}

}
