#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>

#include "binary_io.hpp"
#include "repograph/core/vector_math.hpp"
#include "repograph/index/index.hpp"

namespace repograph {

namespace {

constexpr std::string_view kHnswMagic = "RGHNSW__";
constexpr std::uint32_t kHnswVersion = 1;

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<float> normalized(std::span<const float> v) {
    std::vector<float> out(v.begin(), v.end());
    const double n = l2_norm(v);
    if (n > 0.0) {
        for (auto& x : out) x = static_cast<float>(x / n);
    }
    return out;
}

}  // namespace

HnswIndex::HnswIndex(std::size_t dim, HnswParams params)
    : dim_(dim), params_(params), rng_state_(params.seed) {
    params_.m = std::max<std::size_t>(params_.m, 2);
    params_.ef_construction = std::max(params_.ef_construction, params_.m);
}

std::size_t HnswIndex::random_level() {
    const double u = (static_cast<double>(splitmix64(rng_state_) >> 11) + 1.0) * 0x1.0p-53;
    const double ml = 1.0 / std::log(static_cast<double>(params_.m));
    return static_cast<std::size_t>(std::floor(-std::log(u) * ml));
}

double HnswIndex::distance(std::span<const float> q, Internal i) const {
    return 1.0 - dot(q, vec(i));
}

std::vector<HnswIndex::Candidate> HnswIndex::search_layer(std::span<const float> q, Internal entry,
                                                          std::size_t ef, std::size_t level) const {
    auto closer = [](const Candidate& a, const Candidate& b) {
        return a.dist != b.dist ? a.dist < b.dist : a.node < b.node;
    };
    auto farther = [&](const Candidate& a, const Candidate& b) { return closer(b, a); };
    std::priority_queue<Candidate, std::vector<Candidate>, decltype(farther)> frontier(farther);
    std::priority_queue<Candidate, std::vector<Candidate>, decltype(closer)> best(closer);
    std::vector<bool> visited(ids_.size(), false);

    const Candidate start{distance(q, entry), entry};
    frontier.push(start);
    best.push(start);
    visited[entry] = true;
    while (!frontier.empty()) {
        const auto c = frontier.top();
        frontier.pop();
        if (best.size() >= ef && closer(best.top(), c)) break;
        for (auto nb : links_[c.node][level]) {
            if (visited[nb]) continue;
            visited[nb] = true;
            const Candidate cand{distance(q, nb), nb};
            if (best.size() < ef || closer(cand, best.top())) {
                frontier.push(cand);
                best.push(cand);
                if (best.size() > ef) best.pop();
            }
        }
    }
    std::vector<Candidate> out;
    out.reserve(best.size());
    while (!best.empty()) {
        out.push_back(best.top());
        best.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::vector<HnswIndex::Internal> HnswIndex::select_neighbors(std::span<const float>,
                                                             std::vector<Candidate> candidates,
                                                             std::size_t m) const {
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        return a.dist != b.dist ? a.dist < b.dist : a.node < b.node;
    });
    std::vector<Internal> out;
    for (const auto& c : candidates) {
        if (out.size() >= m) break;
        bool diverse = true;
        for (auto r : out) {
            if (1.0 - dot(vec(c.node), vec(r)) < c.dist) {
                diverse = false;
                break;
            }
        }
        if (diverse) out.push_back(c.node);
    }
    return out;
}

void HnswIndex::add(SubgraphId id, std::span<const float> vector) {
    if (vector.size() != dim_) throw std::invalid_argument("hnsw: vector dimension mismatch");
    if (by_id_.count(id)) throw std::invalid_argument("hnsw: duplicate id " + std::to_string(id));
    const auto node = static_cast<Internal>(ids_.size());
    const auto v = normalized(vector);
    ids_.push_back(id);
    vectors_.insert(vectors_.end(), v.begin(), v.end());
    by_id_.emplace(id, node);
    const auto level = random_level();
    links_.emplace_back(level + 1);
    if (!entry_) {
        entry_ = node;
        top_level_ = level;
        return;
    }
    const auto q = vec(node);
    Internal ep = *entry_;
    for (std::size_t lc = top_level_; lc > level; --lc) ep = search_layer(q, ep, 1, lc).front().node;
    for (std::size_t lc = std::min(top_level_, level) + 1; lc-- > 0;) {
        auto found = search_layer(q, ep, params_.ef_construction, lc);
        links_[node][lc] = select_neighbors(q, found, params_.m);
        for (auto nb : links_[node][lc]) {
            auto& list = links_[nb][lc];
            list.push_back(node);
            if (list.size() > max_links(lc)) {
                std::vector<Candidate> cands;
                for (auto x : list) cands.push_back({1.0 - dot(vec(nb), vec(x)), x});
                list = select_neighbors(vec(nb), std::move(cands), max_links(lc));
            }
        }
        ep = found.front().node;
    }
    if (level > top_level_) {
        top_level_ = level;
        entry_ = node;
    }
}

std::vector<SearchHit> HnswIndex::search(std::span<const float> query, std::size_t k) const {
    if (!entry_ || k == 0) return {};
    if (query.size() != dim_) throw std::invalid_argument("hnsw: query dimension mismatch");
    const auto qn = normalized(query);
    const std::span<const float> q(qn);
    Internal ep = *entry_;
    for (std::size_t lc = top_level_; lc > 0; --lc) ep = search_layer(q, ep, 1, lc).front().node;
    const auto found = search_layer(q, ep, std::max(params_.ef_search, k), 0);
    std::vector<SearchHit> hits;
    hits.reserve(found.size());
    for (const auto& c : found) hits.push_back({ids_[c.node], cosine(q, vec(c.node))});
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        return a.score != b.score ? a.score > b.score : a.id < b.id;
    });
    if (hits.size() > k) hits.resize(k);
    return hits;
}

std::optional<std::span<const float>> HnswIndex::vector_of(SubgraphId id) const {
    const auto it = by_id_.find(id);
    if (it == by_id_.end()) return std::nullopt;
    return vec(it->second);
}

void HnswIndex::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    using detail::put;
    detail::put_magic(out, kHnswMagic, kHnswVersion);
    put<std::uint64_t>(out, dim_);
    put<std::uint64_t>(out, params_.m);
    put<std::uint64_t>(out, params_.ef_construction);
    put<std::uint64_t>(out, params_.ef_search);
    put<std::uint64_t>(out, params_.seed);
    put<std::uint64_t>(out, rng_state_);
    put<std::uint64_t>(out, ids_.size());
    put<std::uint64_t>(out, top_level_);
    put<std::uint32_t>(out, entry_.value_or(0));
    detail::put_array(out, ids_);
    detail::put_array(out, vectors_);
    for (const auto& levels : links_) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(levels.size()));
        for (const auto& l : levels) {
            put<std::uint32_t>(out, static_cast<std::uint32_t>(l.size()));
            detail::put_array(out, l);
        }
    }
    if (!out) throw IoError("write failed for " + path.string());
}

HnswIndex HnswIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    using detail::get;
    detail::expect_magic(in, kHnswMagic, kHnswVersion);
    HnswParams p;
    const auto dim = detail::checked_size(get<std::uint64_t>(in), 1 << 20);
    p.m = detail::checked_size(get<std::uint64_t>(in));
    p.ef_construction = detail::checked_size(get<std::uint64_t>(in));
    p.ef_search = detail::checked_size(get<std::uint64_t>(in));
    p.seed = get<std::uint64_t>(in);
    HnswIndex idx(dim, p);
    idx.rng_state_ = get<std::uint64_t>(in);
    const auto n = detail::checked_size(get<std::uint64_t>(in), 1 << 28);
    idx.top_level_ = detail::checked_size(get<std::uint64_t>(in), 64);
    const auto entry = get<std::uint32_t>(in);
    detail::get_array(in, idx.ids_, n);
    detail::get_array(in, idx.vectors_, n * dim);
    idx.links_.resize(n);
    for (auto& levels : idx.links_) {
        levels.resize(detail::checked_size(get<std::uint32_t>(in), 64));
        for (auto& l : levels) {
            detail::get_array(in, l, detail::checked_size(get<std::uint32_t>(in), n));
            for (auto x : l) {
                if (x >= n) throw DecodeError("hnsw link out of range");
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) idx.by_id_.emplace(idx.ids_[i], static_cast<Internal>(i));
    if (n > 0) {
        if (entry >= n || idx.links_[entry].size() != idx.top_level_ + 1) throw DecodeError("hnsw entry point invalid");
        idx.entry_ = entry;
    }
    if (in.peek() != std::char_traits<char>::eof()) throw DecodeError("trailing bytes in hnsw index");
    return idx;
}

}  // namespace repograph
