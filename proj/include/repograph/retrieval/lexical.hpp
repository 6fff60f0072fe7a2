#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "repograph/graph/code_graph.hpp"
#include "repograph/index/index.hpp"

namespace repograph {

/// Okapi BM25 over pre-tokenized documents.
class Bm25Index {
public:
    explicit Bm25Index(double k1 = 1.2, double b = 0.75) : k1_(k1), b_(b) {}

    void add(std::uint32_t id, const std::vector<std::string>& tokens);
    /// Positive-scoring documents, descending score then ascending id.
    std::vector<SearchHit> search(const std::vector<std::string>& query, std::size_t k,
                                  const std::set<std::uint32_t>& exclude = {}) const;
    double score(const std::vector<std::string>& query, std::size_t doc) const;
    std::size_t size() const { return docs_.size(); }

private:
    struct Doc {
        std::uint32_t id;
        std::map<std::string, std::size_t> tf;
        std::size_t length = 0;
    };
    double idf(const std::string& term) const;

    double k1_;
    double b_;
    std::vector<Doc> docs_;
    std::map<std::string, std::size_t> df_;
    std::size_t total_length_ = 0;
};

/// Fixed-size line window of a source file.
struct CodeWindow {
    std::string file_path;
    std::uint32_t start_line = 1;  // 1-based, inclusive
    std::uint32_t end_line = 1;
    std::string text;
};

std::vector<CodeWindow> sliding_windows(const CodeGraph& graph, std::size_t window_lines, std::size_t stride);

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

}  // namespace repograph
