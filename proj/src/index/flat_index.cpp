#include <fstream>

#include "binary_io.hpp"
#include "repograph/core/vector_math.hpp"
#include "repograph/index/index.hpp"

namespace repograph {

namespace {
constexpr std::string_view kFlatMagic = "RGFLAT__";
constexpr std::uint32_t kFlatVersion = 1;
}  // namespace

void FlatIndex::add(SubgraphId id, std::span<const float> vector) {
    if (vector.size() != dim_) throw std::invalid_argument("flat index: vector dimension mismatch");
    if (!by_id_.emplace(id, ids_.size()).second) {
        throw std::invalid_argument("flat index: duplicate id " + std::to_string(id));
    }
    ids_.push_back(id);
    vectors_.insert(vectors_.end(), vector.begin(), vector.end());
}

std::vector<SearchHit> FlatIndex::search(std::span<const float> query, std::size_t k,
                                         kernels::Exec exec) const {
    if (ids_.empty() || k == 0) return {};
    if (query.size() != dim_) throw std::invalid_argument("flat index: query dimension mismatch");
    const auto top = kernels::topk_cosine(query, vectors_, dim_, ids_.size(), exec);
    std::vector<SearchHit> hits;
    hits.reserve(top.size());
    for (const auto& t : top) hits.push_back({ids_[t.index], t.score});
    // topk orders ties by row; rows may not be in id order after a load from another build
    std::stable_sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        return a.score != b.score ? a.score > b.score : a.id < b.id;
    });
    if (hits.size() > k) hits.resize(k);
    return hits;
}

std::optional<std::span<const float>> FlatIndex::vector_of(SubgraphId id) const {
    const auto it = by_id_.find(id);
    if (it == by_id_.end()) return std::nullopt;
    return std::span<const float>(vectors_.data() + it->second * dim_, dim_);
}

void FlatIndex::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    detail::put_magic(out, kFlatMagic, kFlatVersion);
    detail::put<std::uint64_t>(out, dim_);
    detail::put<std::uint64_t>(out, ids_.size());
    detail::put_array(out, ids_);
    detail::put_array(out, vectors_);
    if (!out) throw IoError("write failed for " + path.string());
}

FlatIndex FlatIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    detail::expect_magic(in, kFlatMagic, kFlatVersion);
    FlatIndex idx(detail::checked_size(detail::get<std::uint64_t>(in), 1 << 20));
    const auto n = detail::checked_size(detail::get<std::uint64_t>(in), 1 << 28);
    detail::get_array(in, idx.ids_, n);
    detail::get_array(in, idx.vectors_, n * idx.dim_);
    for (std::size_t i = 0; i < n; ++i) {
        if (!idx.by_id_.emplace(idx.ids_[i], i).second) throw DecodeError("duplicate id in flat index");
    }
    if (in.peek() != std::char_traits<char>::eof()) throw DecodeError("trailing bytes in flat index");
    return idx;
}

}  // namespace repograph
