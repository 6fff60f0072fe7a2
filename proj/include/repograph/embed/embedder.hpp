#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "repograph/core/http.hpp"
#include "repograph/core/matrix.hpp"
#include "repograph/frontend/frontend.hpp"
#include "repograph/graph/code_graph.hpp"

namespace repograph {

inline constexpr std::size_t kDefaultSemanticDim = 768;
inline constexpr std::size_t kDefaultPeDim = 8;

struct SemanticVector {
    std::vector<float> values;
    std::string source_digest;  // sha256 hex of the embedded text
};

enum class EmbedderKind { Deterministic, Remote };

struct EmbedderConfig {
    EmbedderKind kind = EmbedderKind::Deterministic;
    std::string endpoint;  // base URL of the remote service
    std::size_t dim = kDefaultSemanticDim;
    std::size_t max_in_flight = 8;
    std::size_t batch_size = 64;
};

/// Text to vector backend. Implementations are safe to call concurrently.
class TextEmbedder {
public:
    virtual ~TextEmbedder() = default;
    virtual std::size_t dim() const = 0;
    virtual std::vector<SemanticVector> embed_batch(const std::vector<std::string>& texts) const = 0;

    /// Throws std::invalid_argument when the snippet is blank.
    SemanticVector embed(std::string_view snippet) const;
};

/// Hashed bag of identifiers and keywords with log(1 + tf) weights, L2-normalized.
class HashingEmbedder final : public TextEmbedder {
public:
    explicit HashingEmbedder(std::size_t dim = kDefaultSemanticDim,
                             const LanguageFrontend& frontend = default_frontend());
    std::size_t dim() const override { return dim_; }
    std::vector<SemanticVector> embed_batch(const std::vector<std::string>& texts) const override;

    /// Identifier and keyword tokens that become features.
    std::vector<std::string> features(std::string_view text) const;
    std::size_t bucket(std::string_view feature) const;

private:
    std::size_t dim_;
    const LanguageFrontend& frontend_;
};

/// POST {endpoint}/embed with {"texts": [...]} -> {"vectors": [[...]], "dim": d}.
class RemoteEmbedder final : public TextEmbedder {
public:
    RemoteEmbedder(EmbedderConfig cfg, HttpTransport transport);
    std::size_t dim() const override { return cfg_.dim; }
    std::vector<SemanticVector> embed_batch(const std::vector<std::string>& texts) const override;

private:
    std::vector<SemanticVector> request(const std::vector<std::string>& texts) const;

    EmbedderConfig cfg_;
    HttpTransport transport_;
};

/// Builds the configured backend; the remote one uses a real HTTP transport unless given one.
std::unique_ptr<TextEmbedder> make_embedder(const EmbedderConfig& cfg,
                                            HttpTransport transport = nullptr);

// ---------------------------------------------------------------------------------------
// Spectral positional encoding

struct SymmetricEigen {
    std::vector<double> values;  // ascending
    Matrix vectors;              // column j pairs with values[j]
};

/// Eigen-decomposition of a symmetric matrix by Householder tridiagonalization and
/// implicit QL iterations.
SymmetricEigen symmetric_eigen(const Matrix& m);

/// L = I - D^{-1/2} A D^{-1/2}, with the pseudo-inverse for degree-0 nodes, whose
/// diagonal entry is therefore 0.
Matrix normalized_laplacian(const Matrix& adjacency);

/// Eigenvalues below this are treated as zero.
inline constexpr double kZeroEigenvalue = 1e-8;

/// n x d2 matrix: eigenvectors of the d2 smallest non-zero eigenvalues, ascending,
/// sign-fixed so the first non-zero entry is positive, zero-padded on the right.
Matrix laplacian_pe(const Matrix& adjacency, std::size_t d2);

// ---------------------------------------------------------------------------------------
// Graph embedding

struct StructuralEmbedding {
    std::vector<NodeId> node_order;  // row order of node_vectors
    Matrix node_vectors;             // h_v = [v_c ; v_s], dim d_s + d2
    std::vector<double> pooled;      // mean over rows
};

/// Symmetric 0/1 adjacency over the graph's nodes in NodeId order; self loops dropped.
Matrix undirected_adjacency(const CodeGraph& g, const std::vector<NodeId>& order);

/// Text embedded for a node: its code text, or kind and name when the text is blank.
std::string node_embedding_text(const GraphNode& n);

/// Memoizes node text vectors by content digest across many subgraphs. Thread-safe;
/// returned pointers stay valid for the cache's lifetime.
class NodeVectorCache {
public:
    explicit NodeVectorCache(const TextEmbedder& embedder) : embedder_(embedder) {}
    /// Vectors for all nodes, embedding only texts not seen before.
    std::vector<const std::vector<float>*> lookup(const std::vector<const GraphNode*>& nodes);
    const TextEmbedder& embedder() const { return embedder_; }

private:
    const TextEmbedder& embedder_;
    std::mutex mu_;
    std::map<std::string, std::vector<float>> by_digest_;
};

StructuralEmbedding embed_graph(const CodeGraph& g, const TextEmbedder& embedder,
                                std::size_t d2 = kDefaultPeDim, NodeVectorCache* cache = nullptr);

}  // namespace repograph
