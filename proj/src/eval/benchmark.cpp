#include <chrono>
#include <fstream>
#include <future>
#include <map>

#include "repograph/core/errors.hpp"
#include "repograph/eval/eval.hpp"

namespace repograph {

namespace {

std::string_view kind_name(TaskKind k) { return k == TaskKind::Api ? "api" : "line"; }

}  // namespace

std::vector<EvalRecord> load_tasks(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read tasks file " + path.string());
    const auto base = path.parent_path();
    std::vector<EvalRecord> tasks;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto where = path.string() + ":" + std::to_string(lineno);
        try {
            const auto j = nlohmann::json::parse(line);
            EvalRecord r;
            r.task_id = j.at("task_id").get<std::string>();
            r.repo_path = j.value("repo_path", std::string());
            r.file_path = j.at("file_path").get<std::string>();
            r.prefix = j.at("prefix").get<std::string>();
            r.groundtruth = j.at("groundtruth").get<std::string>();
            const auto kind = j.value("task_kind", std::string("line"));
            if (kind != "line" && kind != "api") throw DecodeError(where + ": unknown task_kind " + kind);
            r.task_kind = kind == "api" ? TaskKind::Api : TaskKind::Line;
            if (r.groundtruth.find('\n') != std::string::npos || trim_trailing(r.groundtruth).empty()) {
                throw DecodeError(where + ": groundtruth must be one non-empty line");
            }
            if (!r.repo_path.empty() && std::filesystem::path(r.repo_path).is_relative()) {
                r.repo_path = (base / r.repo_path).lexically_normal().string();
            }
            tasks.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw DecodeError(where + ": " + e.what());
        }
    }
    return tasks;
}

void save_tasks(const std::vector<EvalRecord>& tasks, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& t : tasks) {
        out << nlohmann::json{{"task_id", t.task_id},       {"repo_path", t.repo_path},
                              {"file_path", t.file_path},   {"prefix", t.prefix},
                              {"groundtruth", t.groundtruth}, {"task_kind", kind_name(t.task_kind)}}
                   .dump()
            << '\n';
    }
}

EvalRecord from_crosscodeeval(const nlohmann::json& j, const std::filesystem::path& repos_root) {
    EvalRecord r;
    const auto& meta = j.at("metadata");
    r.task_id = meta.at("task_id").get<std::string>();
    r.repo_path = (repos_root / meta.at("repository").get<std::string>()).string();
    r.file_path = meta.at("file").get<std::string>();
    r.prefix = j.at("prompt").get<std::string>();
    r.groundtruth = j.at("groundtruth").get<std::string>();
    if (const auto nl = r.groundtruth.find('\n'); nl != std::string::npos) r.groundtruth.resize(nl);
    r.task_kind = j.value("task_kind", std::string("line")) == "api" ? TaskKind::Api : TaskKind::Line;
    return r;
}

QueryContext task_context(const EvalRecord& task, const std::string& repo_name) {
    QueryContext ctx;
    ctx.repo_name = repo_name;
    ctx.file_path = task.file_path;
    ctx.source = task.prefix;
    const auto nl = task.prefix.rfind('\n');
    ctx.line = static_cast<std::uint32_t>(std::count(task.prefix.begin(), task.prefix.end(), '\n') + 1);
    ctx.col = static_cast<std::uint32_t>(task.prefix.size() - (nl == std::string::npos ? 0 : nl + 1) + 1);
    return ctx;
}

TaskResult score_task(const std::string& task_id, std::string_view prediction, std::string_view groundtruth) {
    TaskResult r;
    r.task_id = task_id;
    r.prediction = std::string(prediction);
    r.groundtruth = std::string(groundtruth);
    r.em = exact_match(prediction, groundtruth) ? 1.0 : 0.0;
    r.es = edit_similarity(prediction, groundtruth);
    r.tokens = token_prf(prediction, groundtruth);
    r.identifiers = identifier_prf(prediction, groundtruth);
    return r;
}

EvalMetrics aggregate(std::string variant, std::vector<TaskResult> per_task) {
    EvalMetrics m;
    m.variant = std::move(variant);
    for (const auto& r : per_task) {
        if (r.skipped) {
            ++m.skipped;
            continue;
        }
        ++m.n;
        m.em += r.em;
        m.es += r.es;
        m.precision += r.tokens.precision;
        m.recall += r.tokens.recall;
        m.f1 += r.tokens.f1;
        m.identifier_precision += r.identifiers.precision;
        m.identifier_recall += r.identifiers.recall;
        m.identifier_f1 += r.identifiers.f1;
    }
    if (m.n > 0) {
        const double n = static_cast<double>(m.n);
        for (double* v : {&m.em, &m.es, &m.precision, &m.recall, &m.f1, &m.identifier_precision,
                          &m.identifier_recall, &m.identifier_f1}) {
            *v /= n;
        }
    }
    m.per_task = std::move(per_task);
    return m;
}

EvalMetrics run_benchmark(const std::vector<EvalRecord>& tasks, const PipelineConfig& cfg,
                          const CompletionBackend& backend, const TextEmbedder& embedder,
                          const BenchmarkOptions& options) {
    const bool needs_repo = cfg.variant != Variant::NoRag;
    std::map<std::string, IndexedRepo> repos;
    std::map<std::string, std::string> repo_errors;
    for (const auto& t : tasks) {
        if (!needs_repo || repos.count(t.repo_path) || repo_errors.count(t.repo_path)) continue;
        std::error_code ec;
        if (t.repo_path.empty() || !std::filesystem::is_directory(t.repo_path, ec)) {
            repo_errors[t.repo_path] = "repository not found: " + t.repo_path;
            continue;
        }
        try {
            repos.emplace(t.repo_path, index_repository(t.repo_path, cfg, embedder));
        } catch (const IoError& e) {
            repo_errors[t.repo_path] = e.what();
        } catch (const EmptyCorpusError& e) {
            repo_errors[t.repo_path] = e.what();
        }
    }

    auto run_one = [&](const EvalRecord& t) {
        const auto start = std::chrono::steady_clock::now();
        const IndexedRepo* repo = nullptr;
        if (needs_repo) {
            if (const auto err = repo_errors.find(t.repo_path); err != repo_errors.end()) {
                TaskResult r;
                r.task_id = t.task_id;
                r.groundtruth = t.groundtruth;
                r.skipped = true;
                r.skip_reason = err->second;
                return r;
            }
            repo = &repos.at(t.repo_path);
        }
        const auto repo_name = repo ? repo->repo_name : std::filesystem::path(t.repo_path).filename().string();
        const auto prepared = prepare_prompt(repo, task_context(t, repo_name), cfg, embedder);
        const auto completion = complete({t.task_id, prepared.prompt.text, t.groundtruth}, backend);
        auto r = score_task(t.task_id, completion.completed_code, t.groundtruth);
        r.retrieval = prepared.candidates;
        r.prompt_tokens = prepared.prompt.tokens;
        r.diagnostics = completion.diagnostics;
        for (auto& d : r.diagnostics) d.file_path = t.task_id;
        if (options.record_latency) {
            r.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        }
        return r;
    };

    std::vector<TaskResult> results(tasks.size());
    const auto width = std::max<std::size_t>(options.max_in_flight, 1);
    for (std::size_t wave = 0; wave < tasks.size(); wave += width) {
        const auto end = std::min(tasks.size(), wave + width);
        std::vector<std::future<TaskResult>> inflight;
        for (auto i = wave; i < end; ++i) {
            inflight.push_back(std::async(std::launch::async, run_one, std::cref(tasks[i])));
        }
        for (auto i = wave; i < end; ++i) results[i] = inflight[i - wave].get();
    }
    return aggregate(std::string(to_string(cfg.variant)), std::move(results));
}

nlohmann::json task_json(const TaskResult& r) {
    nlohmann::json retrieval = nlohmann::json::array();
    for (const auto& c : r.retrieval) {
        retrieval.push_back({{"subgraph_id", c.subgraph_id}, {"sem_sim", c.sem_sim}, {"struct_sim", c.struct_sim},
                             {"score", c.score}, {"origin", to_string(c.origin)}});
    }
    nlohmann::json diags = nlohmann::json::array();
    for (const auto& d : r.diagnostics) diags.push_back(d);
    return {{"task_id", r.task_id},
            {"prediction", r.prediction},
            {"groundtruth", r.groundtruth},
            {"skipped", r.skipped},
            {"skip_reason", r.skip_reason},
            {"em", r.em},
            {"es", r.es},
            {"precision", r.tokens.precision},
            {"recall", r.tokens.recall},
            {"f1", r.tokens.f1},
            {"identifier_precision", r.identifiers.precision},
            {"identifier_recall", r.identifiers.recall},
            {"identifier_f1", r.identifiers.f1},
            {"retrieval", std::move(retrieval)},
            {"prompt_tokens", r.prompt_tokens},
            {"latency_ms", r.latency_ms},
            {"diagnostics", std::move(diags)}};
}

nlohmann::json metrics_json(const EvalMetrics& m) {
    return {{"variant", m.variant},
            {"n", m.n},
            {"skipped", m.skipped},
            {"em", m.em},
            {"es", m.es},
            {"precision", m.precision},
            {"recall", m.recall},
            {"f1", m.f1},
            {"identifier", {{"precision", m.identifier_precision}, {"recall", m.identifier_recall}, {"f1", m.identifier_f1}}}};
}

void write_task_report(const EvalMetrics& m, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& r : m.per_task) out << task_json(r).dump() << '\n';
}

void write_csv_summary(const std::vector<EvalMetrics>& runs, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "variant,n,skipped,em,es,precision,recall,f1,id_precision,id_recall,id_f1\n";
    for (const auto& m : runs) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", m.variant.c_str(), m.n,
                      m.skipped, m.em, m.es, m.precision, m.recall, m.f1, m.identifier_precision,
                      m.identifier_recall, m.identifier_f1);
        out << buf;
    }
}

}  // namespace repograph
