#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "repograph/core/errors.hpp"
#include "repograph/graph/builder.hpp"
#include "repograph/graph/graph_store.hpp"

using namespace repograph;

TEST_SUITE("store") {

TEST_CASE("round trip of the ten-file graph") {
    fixtures::TempDir dir;
    fixtures::ten_file_repo(dir / "repo");
    const auto g = build_code_graph(dir / "repo").graph;
    save_graph(g, dir / "g.jsonl");
    const auto back = load_graph(dir / "g.jsonl");
    CHECK(back == g);
    save_graph(back, dir / "g2.jsonl");
    CHECK(fixtures::read_file(dir / "g.jsonl") == fixtures::read_file(dir / "g2.jsonl"));
}

TEST_CASE("records are sorted") {
    fixtures::TempDir dir;
    fixtures::ten_file_repo(dir / "repo");
    std::ostringstream out;
    write_graph(build_code_graph(dir / "repo").graph, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    std::string prev_node;
    bool in_edges = false;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        if (j.contains("n")) {
            CHECK_FALSE(in_edges);
            const auto id = j["n"]["id"].get<std::string>();
            CHECK(id > prev_node);
            prev_node = id;
        } else {
            CHECK(j.contains("e"));
            in_edges = true;
        }
    }
}

TEST_CASE("empty graph") {
    fixtures::TempDir dir;
    CodeGraph empty;
    save_graph(empty, dir / "e.jsonl");
    const auto back = load_graph(dir / "e.jsonl");
    CHECK(back.node_count() == 0);
    CHECK(back.edge_count() == 0);
}

TEST_CASE("truncated and corrupt files") {
    fixtures::TempDir dir;
    fixtures::two_file_repo(dir / "repo");
    std::ostringstream out;
    write_graph(build_code_graph(dir / "repo").graph, out);
    const auto text = out.str();

    std::istringstream truncated(text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(read_graph(truncated), DecodeError);

    auto bumped = text;
    bumped.replace(bumped.find("\"format_version\":1"), 18, "\"format_version\":9");
    std::istringstream wrong_version(bumped);
    CHECK_THROWS_AS(read_graph(wrong_version), DecodeError);

    std::istringstream garbage("{not json\n");
    CHECK_THROWS_AS(read_graph(garbage), DecodeError);

    CHECK_THROWS_AS(load_graph(dir / "missing.jsonl"), IoError);
}

}
