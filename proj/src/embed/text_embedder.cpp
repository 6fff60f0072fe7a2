#include <algorithm>
#include <cctype>
#include <cmath>
#include <future>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "repograph/core/errors.hpp"
#include "repograph/core/hash.hpp"
#include "repograph/embed/embedder.hpp"
#include "repograph/frontend/python_lexer.hpp"

namespace repograph {

SemanticVector TextEmbedder::embed(std::string_view snippet) const {
    const bool blank = std::all_of(snippet.begin(), snippet.end(),
                                   [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
    if (blank) throw std::invalid_argument("cannot embed a blank snippet");
    auto out = embed_batch({std::string(snippet)});
    return std::move(out.front());
}

HashingEmbedder::HashingEmbedder(std::size_t dim, const LanguageFrontend& frontend)
    : dim_(dim), frontend_(frontend) {
    if (dim_ == 0) throw ConfigError("embedding dimension must be positive");
}

std::vector<std::string> HashingEmbedder::features(std::string_view text) const {
    return word_tokens(frontend_, text);
}

std::size_t HashingEmbedder::bucket(std::string_view feature) const {
    return static_cast<std::size_t>(fnv1a64(feature) % dim_);
}

std::vector<SemanticVector> HashingEmbedder::embed_batch(const std::vector<std::string>& texts) const {
    std::vector<SemanticVector> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        std::map<std::string, double> tf;
        for (auto& f : features(text)) tf[std::move(f)] += 1.0;
        std::vector<double> acc(dim_, 0.0);
        for (const auto& [f, count] : tf) acc[bucket(f)] += std::log1p(count);
        double norm = 0.0;
        for (double v : acc) norm += v * v;
        norm = std::sqrt(norm);
        SemanticVector sv;
        sv.values.resize(dim_);
        for (std::size_t i = 0; i < dim_; ++i) {
            sv.values[i] = norm > 0.0 ? static_cast<float>(acc[i] / norm) : 0.0f;
        }
        sv.source_digest = sha256_hex(text);
        out.push_back(std::move(sv));
    }
    return out;
}

RemoteEmbedder::RemoteEmbedder(EmbedderConfig cfg, HttpTransport transport)
    : cfg_(std::move(cfg)), transport_(std::move(transport)) {
    if (cfg_.endpoint.empty()) throw ConfigError("embedder.endpoint is required for the remote backend");
    if (!transport_) throw ConfigError("remote embedder needs a transport");
    cfg_.batch_size = std::max<std::size_t>(cfg_.batch_size, 1);
    cfg_.max_in_flight = std::max<std::size_t>(cfg_.max_in_flight, 1);
}

std::vector<SemanticVector> RemoteEmbedder::request(const std::vector<std::string>& texts) const {
    std::string base = cfg_.endpoint;
    while (!base.empty() && base.back() == '/') base.pop_back();
    const auto res = transport_({base + "/embed", nlohmann::json{{"texts", texts}}.dump(), {}});
    if (res.status != 200) {
        throw TransportError("embedder returned HTTP " + std::to_string(res.status));
    }
    std::vector<SemanticVector> out;
    try {
        const auto j = nlohmann::json::parse(res.body);
        const auto dim = j.at("dim").get<std::size_t>();
        if (dim != cfg_.dim) {
            throw ConfigError("embedder dimension " + std::to_string(dim) + " does not match configured " +
                              std::to_string(cfg_.dim));
        }
        const auto& vectors = j.at("vectors");
        if (vectors.size() != texts.size()) throw TransportError("embedder returned wrong vector count");
        for (std::size_t i = 0; i < texts.size(); ++i) {
            SemanticVector sv;
            sv.values = vectors[i].get<std::vector<float>>();
            if (sv.values.size() != dim) throw ConfigError("embedder vector has wrong dimension");
            for (float v : sv.values) {
                if (!std::isfinite(v)) throw TransportError("embedder returned a non-finite value");
            }
            sv.source_digest = sha256_hex(texts[i]);
            out.push_back(std::move(sv));
        }
    } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("malformed embedder response: ") + e.what());
    }
    return out;
}

std::vector<SemanticVector> RemoteEmbedder::embed_batch(const std::vector<std::string>& texts) const {
    std::vector<std::vector<std::string>> batches;
    for (std::size_t i = 0; i < texts.size(); i += cfg_.batch_size) {
        const auto end = std::min(texts.size(), i + cfg_.batch_size);
        batches.emplace_back(texts.begin() + static_cast<std::ptrdiff_t>(i),
                             texts.begin() + static_cast<std::ptrdiff_t>(end));
    }
    std::vector<SemanticVector> out;
    out.reserve(texts.size());
    for (std::size_t wave = 0; wave < batches.size(); wave += cfg_.max_in_flight) {
        std::vector<std::future<std::vector<SemanticVector>>> inflight;
        const auto end = std::min(batches.size(), wave + cfg_.max_in_flight);
        for (std::size_t b = wave; b < end; ++b) {
            inflight.push_back(std::async(std::launch::async, [this, &batches, b] { return request(batches[b]); }));
        }
        for (auto& f : inflight) {
            for (auto& v : f.get()) out.push_back(std::move(v));
        }
    }
    return out;
}

std::unique_ptr<TextEmbedder> make_embedder(const EmbedderConfig& cfg, HttpTransport transport) {
    if (cfg.kind == EmbedderKind::Deterministic) return std::make_unique<HashingEmbedder>(cfg.dim);
    if (!transport) transport = make_http_transport();
    return std::make_unique<RemoteEmbedder>(cfg, std::move(transport));
}

}  // namespace repograph
