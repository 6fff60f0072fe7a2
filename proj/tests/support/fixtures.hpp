#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "repograph/core/matrix.hpp"
#include "repograph/eval/eval.hpp"

namespace fixtures {

/// Removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

void write_file(const std::filesystem::path& root, const std::string& rel, const std::string& text);
std::string read_file(const std::filesystem::path& p);

/// a.py imports pkg.b.
void two_file_repo(const std::filesystem::path& root);

/// Ten files over three folders; see the counts in the graph tests.
void ten_file_repo(const std::filesystem::path& root);

/// Synthetic repository with `functions` small functions spread over files, calling
/// each other in a chain.
void synthetic_repo(const std::filesystem::path& root, std::size_t functions);

/// Two repositories and 25 line-completion tasks over them, written to root/tasks.jsonl.
std::vector<repograph::EvalRecord> echo_task_set(const std::filesystem::path& root);

struct AblationTask {
    repograph::EvalRecord record;
    std::string needle;    // callee signature the scoring backend looks for
    std::string fallback;  // wrong answer given without it
};

/// Repository where each task's callee has a multi-line signature and lexical decoys
/// share the query's rare tokens.
std::vector<AblationTask> ablation_task_set(const std::filesystem::path& root);

/// Per-function checks: the AstChild edges under each AnchorsAst root form a tree and
/// the ControlFlow blocks reached from the entry have one source and one sink.
/// Returns one message per violation.
std::vector<std::string> function_invariant_failures(const repograph::CodeGraph& g);

// Independent oracles.

/// Full (n+1) x (m+1) dynamic-programming table.
std::size_t dp_levenshtein(const std::string& a, const std::string& b);

/// Greedy matching with a used-flag per reference token.
std::size_t brute_overlap(const std::vector<std::string>& pred, const std::vector<std::string>& ref);

double brute_cosine(const std::vector<float>& a, const std::vector<float>& b);

/// All (index, cosine) pairs sorted by descending score then index.
std::vector<std::pair<std::size_t, double>> brute_ranking(const std::vector<std::vector<float>>& rows,
                                                          const std::vector<float>& q);

std::vector<float> random_vector(std::size_t dim, std::uint64_t& state);

}  // namespace fixtures
