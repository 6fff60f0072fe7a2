#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "repograph/llm/llm_client.hpp"
#include "repograph/pipeline/pipeline.hpp"

namespace repograph {

// ---------------------------------------------------------------------------------------
// Metrics. Every metric compares the strings with trailing whitespace removed.

std::string_view trim_trailing(std::string_view s);

bool exact_match(std::string_view pred, std::string_view ref);

std::size_t levenshtein(std::string_view a, std::string_view b);

/// 1 − Lev / max(|pred|, |ref|); 1 when both are empty.
double edit_similarity(std::string_view pred, std::string_view ref);

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Multiset overlap of lexer tokens. Identical streams (including two empty ones) give (1, 1, 1).
Prf token_prf(std::string_view pred, std::string_view ref, const LanguageFrontend& frontend = default_frontend());

/// Same over identifier tokens only (names that are not keywords).
Prf identifier_prf(std::string_view pred, std::string_view ref,
                   const LanguageFrontend& frontend = default_frontend());

Prf multiset_prf(const std::vector<std::string>& pred, const std::vector<std::string>& ref);

// ---------------------------------------------------------------------------------------
// Tasks

enum class TaskKind { Line, Api };

struct EvalRecord {
    std::string task_id;
    std::string repo_path;  // absolute after loading
    std::string file_path;  // repository-relative
    std::string prefix;
    std::string groundtruth;
    TaskKind task_kind = TaskKind::Line;
};

/// JSONL with the fields of EvalRecord; relative repo paths resolve against the file's
/// directory. Throws DecodeError on malformed records or multi-line/empty groundtruth.
std::vector<EvalRecord> load_tasks(const std::filesystem::path& path);
void save_tasks(const std::vector<EvalRecord>& tasks, const std::filesystem::path& path);

/// Maps one CrossCodeEval-style record ({metadata: {task_id, repository, file}, prompt,
/// groundtruth}) onto the local schema.
EvalRecord from_crosscodeeval(const nlohmann::json& j, const std::filesystem::path& repos_root);

/// Cursor context of a task: the prefix is the file content before the cursor.
QueryContext task_context(const EvalRecord& task, const std::string& repo_name);

// ---------------------------------------------------------------------------------------
// Benchmark

struct TaskResult {
    std::string task_id;
    std::string prediction;
    std::string groundtruth;
    bool skipped = false;
    std::string skip_reason;
    double em = 0.0;
    double es = 0.0;
    Prf tokens;
    Prf identifiers;
    std::vector<RetrievedCandidate> retrieval;
    double prompt_tokens = 0.0;
    double latency_ms = 0.0;
    Diagnostics diagnostics;
};

struct EvalMetrics {
    std::string variant;
    double em = 0.0;
    double es = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double identifier_precision = 0.0;
    double identifier_recall = 0.0;
    double identifier_f1 = 0.0;
    std::size_t n = 0;
    std::size_t skipped = 0;
    std::vector<TaskResult> per_task;
};

TaskResult score_task(const std::string& task_id, std::string_view prediction, std::string_view groundtruth);

/// Means over the non-skipped tasks.
EvalMetrics aggregate(std::string variant, std::vector<TaskResult> per_task);

struct BenchmarkOptions {
    std::size_t max_in_flight = 4;
    bool record_latency = true;
};

EvalMetrics run_benchmark(const std::vector<EvalRecord>& tasks, const PipelineConfig& cfg,
                          const CompletionBackend& backend, const TextEmbedder& embedder,
                          const BenchmarkOptions& options = {});

nlohmann::json metrics_json(const EvalMetrics& m);
nlohmann::json task_json(const TaskResult& r);
void write_task_report(const EvalMetrics& m, const std::filesystem::path& path);
/// One row per variant: variant,n,skipped,em,es,precision,recall,f1,id_precision,id_recall,id_f1.
void write_csv_summary(const std::vector<EvalMetrics>& runs, const std::filesystem::path& path);

}  // namespace repograph
