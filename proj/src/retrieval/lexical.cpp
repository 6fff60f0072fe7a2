#include "repograph/retrieval/lexical.hpp"

#include <algorithm>
#include <cmath>

namespace repograph {

void Bm25Index::add(std::uint32_t id, const std::vector<std::string>& tokens) {
    Doc d{id, {}, tokens.size()};
    for (const auto& t : tokens) ++d.tf[t];
    for (const auto& [t, n] : d.tf) ++df_[t];
    total_length_ += tokens.size();
    docs_.push_back(std::move(d));
}

double Bm25Index::idf(const std::string& term) const {
    const auto it = df_.find(term);
    const double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
    const double n = static_cast<double>(docs_.size());
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double Bm25Index::score(const std::vector<std::string>& query, std::size_t doc) const {
    const auto& d = docs_.at(doc);
    const double avg = docs_.empty() ? 0.0 : static_cast<double>(total_length_) / static_cast<double>(docs_.size());
    const double norm = avg > 0.0 ? static_cast<double>(d.length) / avg : 0.0;
    double s = 0.0;
    for (const auto& term : std::set<std::string>(query.begin(), query.end())) {
        const auto it = d.tf.find(term);
        if (it == d.tf.end()) continue;
        const double tf = static_cast<double>(it->second);
        s += idf(term) * tf * (k1_ + 1.0) / (tf + k1_ * (1.0 - b_ + b_ * norm));
    }
    return s;
}

std::vector<SearchHit> Bm25Index::search(const std::vector<std::string>& query, std::size_t k,
                                         const std::set<std::uint32_t>& exclude) const {
    std::vector<SearchHit> hits;
    for (std::size_t i = 0; i < docs_.size(); ++i) {
        if (exclude.count(docs_[i].id)) continue;
        const double s = score(query, i);
        if (s > 0.0) hits.push_back({docs_[i].id, s});
    }
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        return a.score != b.score ? a.score > b.score : a.id < b.id;
    });
    if (hits.size() > k) hits.resize(k);
    return hits;
}

std::vector<CodeWindow> sliding_windows(const CodeGraph& graph, std::size_t window_lines, std::size_t stride) {
    window_lines = std::max<std::size_t>(window_lines, 1);
    stride = std::max<std::size_t>(stride, 1);
    std::vector<CodeWindow> out;
    for (const auto& [id, n] : graph.nodes()) {
        if (n.node_type != NodeType::File) continue;
        std::vector<std::string_view> lines;
        std::string_view text = n.code_text;
        for (std::size_t pos = 0; pos < text.size();) {
            auto nl = text.find('\n', pos);
            const auto end = nl == std::string_view::npos ? text.size() : nl + 1;
            lines.push_back(text.substr(pos, end - pos));
            pos = end;
        }
        for (std::size_t start = 0; start < lines.size(); start += stride) {
            const auto end = std::min(lines.size(), start + window_lines);
            CodeWindow w{n.file_path, static_cast<std::uint32_t>(start + 1), static_cast<std::uint32_t>(end), {}};
            for (auto i = start; i < end; ++i) w.text.append(lines[i]);
            out.push_back(std::move(w));
            if (end == lines.size()) break;
        }
    }
    return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& x : a) inter += b.count(x);
    return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

}  // namespace repograph
