#include <doctest.h>

#include "fixtures.hpp"
#include "repograph/eval/eval.hpp"
#include "repograph/pipeline/pipeline.hpp"

using namespace repograph;

namespace {

struct Setup {
    fixtures::TempDir dir;
    HashingEmbedder embedder;
    PipelineConfig cfg;
    IndexedRepo repo;
    QueryContext ctx;
};

void setup(Setup& s) {
    fixtures::ten_file_repo(s.dir / "repo");
    s.repo = index_repository(s.dir / "repo", s.cfg, s.embedder);
    s.ctx.repo_name = s.repo.repo_name;
    s.ctx.file_path = "main.py";
    s.ctx.source = fixtures::read_file(s.dir / "repo/main.py");
    const auto lines = std::count(s.ctx.source.begin(), s.ctx.source.end(), '\n');
    s.ctx.line = static_cast<std::uint32_t>(lines + 1);
    s.ctx.col = 1;
}

std::string section(const Prompt& p, std::size_t i) { return p.sections.at(i); }

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("no_fusion keeps the retrieved code and drops the graph section") {
    Setup s;
    setup(s);
    const auto full = prepare_prompt(&s.repo, s.ctx, s.cfg, s.embedder);
    auto nf_cfg = s.cfg;
    nf_cfg.variant = Variant::NoFusion;
    const auto nf = prepare_prompt(&s.repo, s.ctx, nf_cfg, s.embedder);
    CHECK(section(full.prompt, 2) == section(nf.prompt, 2));
    CHECK_FALSE(section(full.prompt, 3).empty());
    CHECK(section(nf.prompt, 3).empty());
    CHECK(nf.prompt.text.find(kGraphSectionHeader) == std::string::npos);
    CHECK(full.fusion.has_value());
    CHECK_FALSE(nf.fusion.has_value());
    CHECK(full.prompt.tokens <= s.cfg.budget.total);
}

TEST_CASE("retrieval never returns the file being completed") {
    Setup s;
    setup(s);
    for (auto v : all_variants()) {
        auto cfg = s.cfg;
        cfg.variant = v;
        const auto p = prepare_prompt(&s.repo, s.ctx, cfg, s.embedder);
        for (const auto& sn : p.snippets) CHECK(sn.file_path != s.ctx.file_path);
        if (v == Variant::NoRag) {
            CHECK(p.snippets.empty());
            CHECK(p.candidates.empty());
        }
        CHECK(p.prompt.local_code == s.ctx.source);
    }
}

TEST_CASE("artifacts reload to the same retrieval") {
    Setup s;
    setup(s);
    save_artifacts(s.repo, s.dir / "out");
    const auto back = load_artifacts(s.dir / "out", s.cfg);
    CHECK(back.graph == s.repo.graph);
    const auto a = prepare_prompt(&s.repo, s.ctx, s.cfg, s.embedder);
    const auto b = prepare_prompt(&back, s.ctx, s.cfg, s.embedder);
    CHECK(a.prompt.text == b.prompt.text);
}

TEST_CASE("serial and parallel pipelines agree") {
    Setup s;
    setup(s);
    auto serial = s.cfg;
    serial.parallel = false;
    serial.fusion.exec = kernels::Exec::Serial;
    const auto repo2 = index_repository(s.dir / "repo", serial, s.embedder);
    CHECK(repo2.graph == s.repo.graph);
    CHECK(prepare_prompt(&repo2, s.ctx, serial, s.embedder).prompt.text ==
          prepare_prompt(&s.repo, s.ctx, s.cfg, s.embedder).prompt.text);
}

TEST_CASE("variant names") {
    for (auto v : all_variants()) CHECK(variant_from_string(to_string(v)) == v);
    CHECK_FALSE(variant_from_string("everything").has_value());
}

}
