// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "repograph/eval/eval.hpp"
#include "repograph/graph/graph_store.hpp"
#include "repograph/pipeline/pipeline.hpp"

using namespace repograph;
namespace fs = std::filesystem;

namespace {

class Checker {
public:
    void expect(bool ok, const std::string& what) {
        ++checks_;
        if (!ok && failures_.size() < 5) failures_.push_back(what);
        if (!ok) ++failed_;
    }
    void near(double got, double want, double tol, const std::string& what) {
        std::ostringstream ss;
        ss << what << ": got " << got << ", want " << want;
        expect(std::abs(got - want) <= tol, ss.str());
    }
    bool ok() const { return failed_ == 0; }
    std::size_t checks() const { return checks_; }
    std::string summary() const {
        std::string s = std::to_string(failed_) + " of " + std::to_string(checks_) + " checks failed";
        for (const auto& f : failures_) s += "; " + f;
        return s;
    }

private:
    std::size_t checks_ = 0;
    std::size_t failed_ = 0;
    std::vector<std::string> failures_;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// -------------------------------------------------------------------------------------------
// 1. metric oracles

struct MetricPair {
    std::string pred;
    std::string ref;
    std::vector<std::string> pred_tokens;  // by hand
    std::vector<std::string> ref_tokens;
};

void criterion_metrics(Checker& c) {
    const std::vector<MetricPair> pairs = {
        {"x = 1", "x = 1", {"x", "=", "1"}, {"x", "=", "1"}},
        {"x = 1", "x = 2", {"x", "=", "1"}, {"x", "=", "2"}},
        {"x = 1 ", "x = 1", {"x", "=", "1"}, {"x", "=", "1"}},
        {"abc", "abc", {"abc"}, {"abc"}},
        {"abc", "abd", {"abc"}, {"abd"}},
        {"", "abc", {}, {"abc"}},
        {"foo(a)", "foo(a, b)", {"foo", "(", "a", ")"}, {"foo", "(", "a", ",", "b", ")"}},
        {"return a + b", "return a - b", {"return", "a", "+", "b"}, {"return", "a", "-", "b"}},
        {"self.x = y", "self.y = x", {"self", ".", "x", "=", "y"}, {"self", ".", "y", "=", "x"}},
        {"if a:", "if a and b:", {"if", "a", ":"}, {"if", "a", "and", "b", ":"}},
        {"total += price", "total += price * qty", {"total", "+=", "price"}, {"total", "+=", "price", "*", "qty"}},
        {"    return None", "    return self.value", {"return", "None"}, {"return", "self", ".", "value"}},
        {"items.append(x)", "items.append(x)", {"items", ".", "append", "(", "x", ")"},
         {"items", ".", "append", "(", "x", ")"}},
        {"a, b = b, a", "a, b = a, b", {"a", ",", "b", "=", "b", ",", "a"}, {"a", ",", "b", "=", "a", ",", "b"}},
        {"f(g(h(1)))", "f(g(2))", {"f", "(", "g", "(", "h", "(", "1", ")", ")", ")"}, {"f", "(", "g", "(", "2", ")", ")"}},
        {"x", "y", {"x"}, {"y"}},
        {"for i in range(n):", "for j in range(n):", {"for", "i", "in", "range", "(", "n", ")", ":"},
         {"for", "j", "in", "range", "(", "n", ")", ":"}},
        {"print(x)", "", {"print", "(", "x", ")"}, {}},
        {"", "", {}, {}},
        {"return [v for v in vs]", "return list(vs)", {"return", "[", "v", "for", "v", "in", "vs", "]"},
         {"return", "list", "(", "vs", ")"}},
        {"while not done:", "while not done:\t", {"while", "not", "done", ":"}, {"while", "not", "done", ":"}},
        {"x == y", "x != y", {"x", "==", "y"}, {"x", "!=", "y"}},
        {"a = b = c", "a = c", {"a", "=", "b", "=", "c"}, {"a", "=", "c"}},
        {"lambda k: k * 2", "lambda k: k ** 2", {"lambda", "k", ":", "k", "*", "2"}, {"lambda", "k", ":", "k", "**", "2"}},
    };
    const auto& fe = default_frontend();
    std::vector<TaskResult> per;
    double em_sum = 0, es_sum = 0, p_sum = 0, r_sum = 0, f_sum = 0;
    for (const auto& p : pairs) {
        const std::string tag = "'" + p.pred + "' vs '" + p.ref + "'";
        c.expect(fe.lex_fragment(trim_trailing(p.pred)) == p.pred_tokens, "lexer tokens of " + p.pred);
        c.expect(fe.lex_fragment(trim_trailing(p.ref)) == p.ref_tokens, "lexer tokens of " + p.ref);

        auto rtrim = [](std::string s) {
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
            return s;
        };
        const auto a = rtrim(p.pred), b = rtrim(p.ref);
        const double em = a == b ? 1.0 : 0.0;
        const double es = a.empty() && b.empty()
                              ? 1.0
                              : 1.0 - static_cast<double>(fixtures::dp_levenshtein(a, b)) /
                                          static_cast<double>(std::max(a.size(), b.size()));
        double prec = 0, rec = 0, f1 = 0;
        if (p.pred_tokens == p.ref_tokens) {
            prec = rec = f1 = 1.0;
        } else {
            const auto overlap = static_cast<double>(fixtures::brute_overlap(p.pred_tokens, p.ref_tokens));
            prec = p.pred_tokens.empty() ? 0.0 : overlap / static_cast<double>(p.pred_tokens.size());
            rec = p.ref_tokens.empty() ? 0.0 : overlap / static_cast<double>(p.ref_tokens.size());
            f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
        }
        const auto r = score_task(tag, p.pred, p.ref);
        c.near(r.em, em, 1e-9, "EM " + tag);
        c.near(r.es, es, 1e-9, "ES " + tag);
        c.near(r.tokens.precision, prec, 1e-9, "precision " + tag);
        c.near(r.tokens.recall, rec, 1e-9, "recall " + tag);
        c.near(r.tokens.f1, f1, 1e-9, "F1 " + tag);
        c.near(edit_similarity(p.ref, p.pred), r.es, 1e-12, "ES symmetry " + tag);
        per.push_back(r);
        em_sum += em, es_sum += es, p_sum += prec, r_sum += rec, f_sum += f1;
    }
    const auto n = static_cast<double>(pairs.size());
    const auto m = aggregate("oracle", per);
    c.near(m.em, em_sum / n, 1e-9, "mean EM");
    c.near(m.es, es_sum / n, 1e-9, "mean ES");
    c.near(m.precision, p_sum / n, 1e-9, "mean precision");
    c.near(m.recall, r_sum / n, 1e-9, "mean recall");
    c.near(m.f1, f_sum / n, 1e-9, "mean F1");
    c.expect(pairs.size() >= 20, "at least 20 pairs");
}

// -------------------------------------------------------------------------------------------
// 2. graph construction

void criterion_graph(Checker& c) {
    fixtures::TempDir dir;
    fixtures::ten_file_repo(dir.path());
    const auto r = build_code_graph(dir.path());
    std::map<GraphType, std::size_t> nodes;
    for (const auto& [id, n] : r.graph.nodes()) ++nodes[n.graph_type];
    std::map<EdgeType, std::size_t> edges;
    for (const auto& e : r.graph.edges()) ++edges[e.edge_type];

    const std::map<GraphType, std::size_t> want_nodes = {
        {GraphType::FolderStructure, 13}, {GraphType::CallGraph, 9}, {GraphType::ClassInheritance, 2},
        {GraphType::TypeDep, 3},          {GraphType::Ast, 46},      {GraphType::Cfg, 25},
        {GraphType::Dfg, 22}};
    const std::map<EdgeType, std::size_t> want_edges = {
        {EdgeType::Contains, 12},          {EdgeType::Imports, 5},         {EdgeType::Calls, 3},
        {EdgeType::Implements, 1},         {EdgeType::TypeUses, 1},        {EdgeType::AstChild, 37},
        {EdgeType::ControlFlow, 16},       {EdgeType::Defines, 8},         {EdgeType::Uses, 6},
        {EdgeType::DataFlow, 6},           {EdgeType::DeclaresFunction, 9}, {EdgeType::AnchorsAst, 9},
        {EdgeType::TypeReference, 1},      {EdgeType::InterfaceInheritance, 1}, {EdgeType::AstToCfg, 16},
        {EdgeType::CfgToDfg, 14},          {EdgeType::TypeAlignsDataflow, 1}};
    c.expect(nodes == want_nodes, "node counts per graph type");
    c.expect(edges == want_edges, "edge counts per edge type");
    for (const auto& [t, n] : want_edges) {
        c.expect(edges[t] == n, std::string("count of ") + std::string(to_string(t)));
    }

    std::ostringstream a, b;
    write_graph(r.graph, a);
    BuildOptions serial;
    serial.parallel = false;
    write_graph(build_code_graph(dir.path(), serial).graph, b);
    c.expect(a.str() == b.str(), "two builds are byte-identical");

    c.expect(r.graph.validate().empty(), "graph validates");
    const auto bad = fixtures::function_invariant_failures(r.graph);
    c.expect(bad.empty(), bad.empty() ? "" : bad.front());

    fixtures::TempDir synth;
    fixtures::synthetic_repo(synth.path(), 60);
    const auto s = build_code_graph(synth.path());
    const auto sbad = fixtures::function_invariant_failures(s.graph);
    c.expect(sbad.empty(), sbad.empty() ? "" : sbad.front());
}

// -------------------------------------------------------------------------------------------
// 3. Laplacian

std::vector<double> eigen_oracle(const Matrix& a) {
    const auto n = a.rows;
    Eigen::MatrixXd m(n, n);
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) {
        double deg = 0;
        for (std::size_t j = 0; j < n; ++j) deg += a(i, j);
        d[i] = deg > 0 ? 1.0 / std::sqrt(deg) : 0.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) m(i, j) = (i == j && d[i] > 0 ? 1.0 : 0.0) - d[i] * a(i, j) * d[j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    return {solver.eigenvalues().data(), solver.eigenvalues().data() + n};
}

void criterion_laplacian(Checker& c) {
    auto adjacency = [](std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& es) {
        Matrix a(n, n);
        for (const auto& [i, j] : es) a(i, j) = a(j, i) = 1.0;
        return a;
    };
    const auto p3 = adjacency(3, {{0, 1}, {1, 2}});
    const auto k3 = adjacency(3, {{0, 1}, {1, 2}, {0, 2}});
    const auto p3_got = symmetric_eigen(normalized_laplacian(p3)).values;
    const auto k3_got = symmetric_eigen(normalized_laplacian(k3)).values;
    const auto p3_or = eigen_oracle(p3), k3_or = eigen_oracle(k3);
    const double p3_want[3] = {0, 1, 2}, k3_want[3] = {0, 1.5, 1.5};
    for (int i = 0; i < 3; ++i) {
        c.near(p3_got[i], p3_or[i], 1e-6, "P3 vs oracle");
        c.near(p3_got[i], p3_want[i], 1e-6, "P3 closed form");
        c.near(k3_got[i], k3_or[i], 1e-6, "K3 vs oracle");
        c.near(k3_got[i], k3_want[i], 1e-6, "K3 closed form");
    }

    std::uint64_t state = 2024;
    for (int trial = 0; trial < 100; ++trial) {
        const auto n = 1 + static_cast<std::size_t>((fixtures::random_vector(1, state)[0] + 1.0f) * 6.0f) % 12;
        std::vector<std::pair<std::size_t, std::size_t>> es;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (fixtures::random_vector(1, state)[0] < -0.3f) es.emplace_back(i, j);
            }
        }
        const auto a = adjacency(n, es);
        const auto got = symmetric_eigen(normalized_laplacian(a)).values;
        const auto want = eigen_oracle(a);
        for (std::size_t i = 0; i < n; ++i) {
            c.expect(got[i] >= -1e-9 && got[i] <= 2.0 + 1e-9, "eigenvalue in [0, 2]");
            c.near(got[i], want[i], 1e-9, "random graph eigenvalue vs oracle");
        }
        // sign convention: first non-negligible entry of every PE column is positive, and reruns agree
        const auto pe = laplacian_pe(a, 8);
        c.expect(pe == laplacian_pe(a, 8), "positional encoding is deterministic");
        for (std::size_t col = 0; col < pe.cols; ++col) {
            for (std::size_t r = 0; r < pe.rows; ++r) {
                if (std::abs(pe(r, col)) > 1e-12) {
                    c.expect(pe(r, col) > 0, "sign convention");
                    break;
                }
            }
        }
    }
    const auto single = laplacian_pe(Matrix(1, 1), 4);
    c.expect(std::all_of(single.data.begin(), single.data.end(), [](double v) { return v == 0.0; }),
             "single node has zero encoding");
}

// -------------------------------------------------------------------------------------------
// 4. retrieval

void criterion_retrieval(Checker& c) {
    HashingEmbedder embedder;
    for (int which = 0; which < 2; ++which) {
        fixtures::TempDir dir;
        if (which == 0) {
            fixtures::ten_file_repo(dir.path());
        } else {
            fixtures::synthetic_repo(dir.path(), 80);
        }
        const auto g = build_code_graph(dir.path()).graph;
        const auto set = build_indexes(g, embedder);
        std::vector<std::vector<float>> rows;
        for (const auto& u : set.catalog) {
            const auto v = *set.structural.vector_of(u.subgraph_id);
            rows.emplace_back(v.begin(), v.end());
        }
        for (std::size_t qi = 0; qi < rows.size(); ++qi) {
            const auto want = fixtures::brute_ranking(rows, rows[qi]);
            const auto got = set.structural.search(rows[qi], rows.size());
            bool same = got.size() == want.size();
            for (std::size_t i = 0; same && i < got.size(); ++i) {
                same = std::abs(got[i].score - want[i].second) < 1e-9 &&
                       (got[i].id == set.catalog[want[i].first].subgraph_id ||
                        std::abs(want[i].second - (i + 1 < want.size() ? want[i + 1].second : -2)) < 1e-12 ||
                        (i > 0 && std::abs(want[i].second - want[i - 1].second) < 1e-12));
            }
            c.expect(same, "structural search equals brute force");
        }

        // boundary identities of the hybrid score
        for (std::size_t qi = 0; qi < std::min<std::size_t>(rows.size(), 10); ++qi) {
            QueryVectors q;
            const auto sv = *set.semantic.vector_of(set.catalog[qi].subgraph_id);
            q.semantic.assign(sv.begin(), sv.end());
            q.structural = rows[qi];
            for (double alpha : {1.0, 0.0}) {
                RerankConfig cfg;
                cfg.alpha = alpha;
                const auto merged = merge_candidates(q, set, cfg);
                bool ordered = true;
                for (std::size_t i = 1; i < merged.size(); ++i) {
                    const double a = alpha == 1.0 ? merged[i - 1].sem_sim : merged[i - 1].struct_sim;
                    const double b = alpha == 1.0 ? merged[i].sem_sim : merged[i].struct_sim;
                    ordered &= a > b || (a == b && merged[i - 1].subgraph_id < merged[i].subgraph_id);
                }
                c.expect(ordered, alpha == 1.0 ? "alpha = 1 gives semantic order" : "alpha = 0 gives structural order");
            }
            RerankConfig mmr1;
            mmr1.mmr_lambda = 1.0;
            const auto picked = retrieve(q, set, mmr1);
            const auto merged = merge_candidates(q, set, mmr1);
            bool prefix = picked.size() == std::min(mmr1.k, merged.size());
            for (std::size_t i = 0; prefix && i < picked.size(); ++i) prefix = picked[i].subgraph_id == merged[i].subgraph_id;
            c.expect(prefix, "lambda = 1 keeps score order");
        }
    }

    AdaptiveWeights zero{std::vector<double>(6, 0.0), 0.0, 6};
    std::uint64_t s = 17;
    for (int i = 0; i < 10; ++i) {
        const auto v = fixtures::random_vector(4, s), h = fixtures::random_vector(2, s);
        c.expect(adaptive_alpha(v, h, zero) == 0.5, "zero adaptive weights give exactly 0.5");
    }

    std::vector<std::vector<float>> corpus;
    std::uint64_t cs = 1000;
    HnswIndex hnsw(32);
    for (SubgraphId i = 0; i < 1000; ++i) {
        corpus.push_back(fixtures::random_vector(32, cs));
        hnsw.add(i, corpus.back());
    }
    std::size_t found = 0;
    for (int qn = 0; qn < 100; ++qn) {
        const auto q = fixtures::random_vector(32, cs);
        const auto want = fixtures::brute_ranking(corpus, q);
        std::set<SubgraphId> truth;
        for (std::size_t i = 0; i < 10; ++i) truth.insert(static_cast<SubgraphId>(want[i].first));
        for (const auto& h : hnsw.search(q, 10)) found += truth.count(h.id);
    }
    const double recall = static_cast<double>(found) / 1000.0;
    c.expect(recall >= 0.95, "HNSW recall@10 " + std::to_string(recall));
}

// -------------------------------------------------------------------------------------------
// 5. fusion

void criterion_fusion(Checker& c) {
    fixtures::TempDir dir;
    fixtures::synthetic_repo(dir.path(), 40);
    const auto g = build_code_graph(dir.path()).graph;
    const auto units = build_subgraph_units(g);
    HashingEmbedder embedder;
    for (std::size_t start = 0; start + 3 <= units.size() && start < 12; start += 3) {
        std::vector<RetrievedGraph> retrieved;
        for (std::size_t i = start; i < start + 3; ++i) {
            retrieved.push_back({units[i].subgraph_id, 0.9 - 0.1 * double(i - start), induced_subgraph(g, units[i].node_ids)});
        }
        QueryContext ctx;
        ctx.file_path = "query.py";
        ctx.source = "def fresh(n):\n    total = 0\n    for i in range(n):\n        total = f" + std::to_string(start) +
                     "(i)\n    return ";
        ctx.line = 5;
        ctx.col = 12;
        const auto query = build_query_graph(ctx).graph;
        FusionConfig cfg;
        const auto r = fuse(query, retrieved, embedder, cfg);
        for (std::size_t i = 0; i < r.attention.rows; ++i) {
            double sum = 0;
            for (std::size_t j = 0; j < r.attention.cols; ++j) {
                sum += r.attention(i, j);
                c.expect((r.attention(i, j) > 0.0 && r.attention(i, j) < 1.0) || r.attention.cols == 1, "attention in (0, 1)");
            }
            c.near(sum, 1.0, 1e-6, "attention row sum");
        }
        for (const auto& e : r.fused.cross_edges) {
            c.expect(e.weight > 0.4, "cross edge weight above 0.4");
            c.expect(type_compatible(*r.fused.graph.find(e.src), *r.fused.graph.find(e.dst)), "cross edge type compatible");
            c.expect(r.fused.provenance.at(e.src).from_query && !r.fused.provenance.at(e.dst).from_query,
                     "cross edge joins query to retrieved");
        }
        std::set<std::tuple<NodeId, NodeId, EdgeType>> fused_edges;
        for (const auto& e : r.fused.graph.edges()) fused_edges.emplace(e.src, e.dst, e.edge_type);
        auto home = [&](const NodeId& id) {
            const auto it = r.fused.merged_into.find(id);
            return it == r.fused.merged_into.end() ? id : it->second;
        };
        for (const auto& e : query.edges()) c.expect(fused_edges.count({e.src, e.dst, e.edge_type}) == 1, "query edge kept");
        for (const auto& rg : retrieved) {
            for (const auto& e : rg.graph.edges()) {
                c.expect(fused_edges.count({home(e.src), home(e.dst), e.edge_type}) == 1, "retrieved edge kept");
            }
        }

        std::vector<GraphEdge> prev;
        for (int t = 1; t <= 9; ++t) {
            const double theta = t / 10.0;
            const auto fg = build_fused_graph(query, retrieved, r.attention, r.query_order, r.retrieved_order, theta);
            if (t > 1) {
                bool subset = fg.cross_edges.size() <= prev.size();
                for (const auto& e : fg.cross_edges) subset &= std::binary_search(prev.begin(), prev.end(), e, edge_less);
                c.expect(subset, "cross edges shrink as theta grows");
            }
            prev = fg.cross_edges;
        }
        const auto again = fuse(query, retrieved, embedder, cfg);
        c.expect(again.fused.graph == r.fused.graph && again.attention == r.attention, "fusion is deterministic");
    }
}

// -------------------------------------------------------------------------------------------
// 6. echo end to end

void criterion_echo(Checker& c) {
    fixtures::TempDir dir;
    fixtures::echo_task_set(dir.path());
    const auto tasks = load_tasks(dir / "tasks.jsonl");
    c.expect(tasks.size() == 25, "25 tasks");
    HashingEmbedder embedder;
    MockBackend echo;
    const auto m = run_benchmark(tasks, PipelineConfig{}, echo, embedder);
    c.expect(m.n == 25 && m.skipped == 0, "all tasks ran");
    c.expect(m.em == 1.0, "EM = 1");
    c.expect(m.es == 1.0, "ES = 1");
    c.expect(m.recall == 1.0, "recall = 1");
    c.expect(m.f1 == 1.0, "F1 = 1");
}

// -------------------------------------------------------------------------------------------
// 7. ablation

std::map<Variant, double> ablation_em(const std::vector<fixtures::AblationTask>& tasks) {
    MockBackend scoring(MockMode::Scoring);
    std::vector<EvalRecord> records;
    for (const auto& t : tasks) {
        scoring.set_needle(t.record.task_id, t.needle);
        scoring.set_fallback(t.fallback);
        records.push_back(t.record);
    }
    HashingEmbedder embedder;
    std::map<Variant, double> out;
    for (auto v : {Variant::Full, Variant::NoFusion, Variant::Bm25}) {
        PipelineConfig cfg;
        cfg.variant = v;
        out[v] = run_benchmark(records, cfg, scoring, embedder).em;
    }
    return out;
}

void criterion_ablation(Checker& c) {
    fixtures::TempDir dir;
    const auto tasks = fixtures::ablation_task_set(dir.path());
    const auto em = ablation_em(tasks);
    std::ostringstream ss;
    ss << "EM full " << em.at(Variant::Full) << ", no_fusion " << em.at(Variant::NoFusion) << ", bm25 "
       << em.at(Variant::Bm25);
    c.expect(em.at(Variant::Full) > em.at(Variant::NoFusion), ss.str());
    c.expect(em.at(Variant::Full) > em.at(Variant::Bm25), ss.str());
}

// -------------------------------------------------------------------------------------------
// 8. budget

void criterion_budget(Checker& c) {
    fixtures::TempDir dir;
    fixtures::synthetic_repo(dir / "repo", 120);
    HashingEmbedder embedder;
    PipelineConfig cfg;
    const auto repo = index_repository(dir / "repo", cfg, embedder);
    std::vector<std::string> files;
    for (const auto& [id, n] : repo.graph.nodes()) {
        if (n.node_type == NodeType::File) files.push_back(n.file_path);
    }
    std::uint64_t s = 808;
    auto uniform = [&](std::size_t n) {
        return static_cast<std::size_t>((fixtures::random_vector(1, s)[0] + 1.0f) * 0.5f * static_cast<float>(n)) % n;
    };
    const auto variants = all_variants();
    for (int i = 0; i < 100; ++i) {
        const auto& file = files[uniform(files.size())];
        auto source = fixtures::read_file(dir / "repo" / file);
        // every other prompt carries an oversized prefix
        if (i % 2 == 1) {
            std::string pad;
            for (std::size_t w = 0, n = 400 + uniform(3000); w < n; ++w) pad += "pad_" + std::to_string(w) + (w % 9 == 8 ? "\n" : " ");
            source = "\"\"\"\n" + pad + "\n\"\"\"\n" + source;
        }
        std::uint32_t lines = static_cast<std::uint32_t>(std::count(source.begin(), source.end(), '\n'));
        QueryContext ctx{repo.repo_name, file, source, static_cast<std::uint32_t>(1 + uniform(lines)), 1};
        auto pcfg = cfg;
        pcfg.variant = variants[static_cast<std::size_t>(i) % variants.size()];
        const auto p = prepare_prompt(&repo, ctx, pcfg, embedder);
        const auto prefix = source.substr(0, cursor_offset(source, ctx.line, ctx.col));
        c.expect(p.prompt.tokens <= 2048.0, "prompt within 2048 tokens");
        c.expect(p.prompt.local_tokens <= 1024.0, "local half within 1024 tokens");
        c.expect(p.prompt.retrieved_tokens <= 1024.0, "retrieved half within 1024 tokens");
        c.expect(std::string_view(prefix).ends_with(p.prompt.local_code), "local code ends at the cursor");
        c.expect(p.prompt.sections[1].ends_with(p.prompt.local_code + (p.prompt.local_code.empty() || p.prompt.local_code.back() == '\n' ? "" : "\n") + "```"),
                 "local code closes the context section");
    }
}

// -------------------------------------------------------------------------------------------
// 9. performance

void criterion_performance(Checker& c, std::string& detail) {
    fixtures::TempDir dir;
    fixtures::synthetic_repo(dir / "repo", 500);
    HashingEmbedder embedder;
    PipelineConfig cfg;
    const auto t0 = Clock::now();
    const auto repo = index_repository(dir / "repo", cfg, embedder);
    const double index_s = seconds_since(t0);
    c.expect(repo.indexes.catalog.size() == 500, "500 units");
    c.expect(index_s < 60.0, "indexing under 60 s");

    std::vector<RetrievedGraph> retrieved;
    std::size_t total = 0;
    for (const auto& u : repo.indexes.catalog) {
        if (total >= 600) break;
        auto ids = u.node_ids;
        if (total + ids.size() > 600) ids.resize(600 - total);
        retrieved.push_back({u.subgraph_id, 0.5, induced_subgraph(repo.graph, ids)});
        total += retrieved.back().graph.node_count();
    }
    fixtures::TempDir qdir;
    fixtures::synthetic_repo(qdir / "q", 10);
    const auto qg = build_code_graph(qdir / "q").graph;
    std::vector<NodeId> qids;
    for (const auto& [id, n] : qg.nodes()) {
        if (qids.size() < 50) qids.push_back(id);
    }
    const auto query = induced_subgraph(qg, qids);
    const auto t1 = Clock::now();
    const auto r = fuse(query, retrieved, embedder, cfg.fusion);
    const double fuse_s = seconds_since(t1);
    c.expect(r.attention.rows == 50 && r.attention.cols == 600, "fusion shape 50 x 600");
    c.expect(fuse_s < 1.0, "fusion under 1 s");
    char buf[96];
    std::snprintf(buf, sizeof buf, "index %.2f s, fusion %.3f s", index_s, fuse_s);
    detail = buf;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double limit_s;  // 0: untimed
        std::function<void(Checker&, std::string&)> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "metric oracles", 1.0, [](Checker& c, std::string&) { criterion_metrics(c); }},
        {2, "graph construction", 10.0, [](Checker& c, std::string&) { criterion_graph(c); }},
        {3, "laplacian encoding", 0.0, [](Checker& c, std::string&) { criterion_laplacian(c); }},
        {4, "retrieval", 30.0, [](Checker& c, std::string&) { criterion_retrieval(c); }},
        {5, "fusion", 0.0, [](Checker& c, std::string&) { criterion_fusion(c); }},
        {6, "echo end to end", 30.0, [](Checker& c, std::string&) { criterion_echo(c); }},
        {7, "ablation differentiation", 0.0, [](Checker& c, std::string&) { criterion_ablation(c); }},
        {8, "budget compliance", 0.0, [](Checker& c, std::string&) { criterion_budget(c); }},
        {9, "performance", 0.0, criterion_performance},
    };
    int failed = 0;
    for (const auto& cr : criteria) {
        Checker c;
        std::string detail;
        const auto t0 = Clock::now();
        try {
            cr.run(c, detail);
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        const double took = seconds_since(t0);
        if (cr.limit_s > 0) c.expect(took < cr.limit_s, "runtime " + std::to_string(took) + " s over the limit");
        const bool ok = c.ok();
        failed += !ok;
        std::printf("criterion %d %-26s %s  (%zu checks, %.2f s)%s%s\n", cr.id, cr.name, ok ? "PASS" : "FAIL", c.checks(),
                    took, detail.empty() ? "" : "  ", detail.c_str());
        if (!ok) std::printf("    %s\n", c.summary().c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
