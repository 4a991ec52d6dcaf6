#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rationmem/corpus.hpp"
#include "rationmem/encoder.hpp"
#include "rationmem/numeric.hpp"

namespace rationmem {

// All learnable state for one category's classifier. Parameters live in a
// ParamStore with fixed slot order (embeddings, similarity form, classifier
// weights, classifier bias) so optimizer and checkpoint iteration is stable.
class MemoryNetModel {
public:
    static constexpr std::string_view kEmbeddingsSlot = "embeddings";
    static constexpr std::string_view kSimilaritySlot = "similarity_w";
    static constexpr std::string_view kClassifierWSlot = "classifier_w";
    static constexpr std::string_view kClassifierBSlot = "classifier_b";

    // Fresh model: embeddings ~ N(0, 0.1), similarity form = identity,
    // classifier weights and bias = 0.
    MemoryNetModel(Vocabulary vocab, std::size_t embedding_dim, Category category,
                   std::uint64_t init_seed);

    // From existing parameters (checkpoint restore, gradient checking).
    MemoryNetModel(Vocabulary vocab, Category category, ParamStore params);

    const Vocabulary& vocab() const { return vocab_; }
    Category category() const { return category_; }
    std::size_t embedding_dim() const { return embedding_dim_; }

    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }
    void set_params(ParamStore params);

    const Mat64& embeddings() const { return params_.mat(kEmbeddingsSlot); }
    const Mat64& similarity_form() const { return params_.mat(kSimilaritySlot); }
    const Vec64& classifier_weights() const { return params_.vec(kClassifierWSlot); }
    double classifier_bias() const { return params_.vec(kClassifierBSlot)[0]; }

    Mat64& embeddings() { return params_.mat(kEmbeddingsSlot); }
    Mat64& similarity_form() { return params_.mat(kSimilaritySlot); }
    Vec64& classifier_weights() { return params_.vec(kClassifierWSlot); }
    void set_classifier_bias(double b) { params_.vec(kClassifierBSlot)[0] = b; }

private:
    void validate_shapes() const;

    Vocabulary vocab_;
    Category category_ = Category::ltd;
    std::size_t embedding_dim_ = 0;
    ParamStore params_;
};

// The encoded knowledge base: one slot per rationale, in KB order. Token
// indices are kept so gradients can flow back into the shared embeddings.
struct EncodedMemory {
    struct Slot {
        std::string id;
        Vec64 vec;
        std::vector<std::size_t> token_indices;
    };
    Category category = Category::ltd;
    std::vector<Slot> slots;

    std::size_t size() const { return slots.size(); }
    // Slot index for a rationale ID; throws when absent.
    std::size_t index_of(std::string_view id) const;
};

// Every intermediate of one forward evaluation.
struct ForwardTrace {
    std::vector<std::size_t> token_indices;  // clause tokens, after vocab lookup
    Vec64 q;                                 // encoded clause
    std::vector<double> scores;              // s(q, m_i) per slot
    std::vector<double> weights;             // sigmoid(scores[i])
    Vec64 c;                                 // weighted memory read
    Vec64 q_tilde;                           // concat(q, c)
    double probability = 0.0;                // classifier output
};

// Bilinear form q^T W m; with W = identity this is the dot product.
double similarity(const Vec64& q, const Vec64& m, const Mat64& sim_w);

// Independent sigmoid gate per slot; the weights deliberately do not sum to 1.
std::vector<double> attention(const Vec64& q, const EncodedMemory& mem, const Mat64& sim_w);

// c = sum_i weights[i] * m_i, accumulated in slot order.
Vec64 read_memory(const std::vector<double>& weights, const EncodedMemory& mem);

// Concatenation [q; c].
Vec64 update_query(const Vec64& q, const Vec64& c);

// tokenize -> encode -> attention -> read -> update -> classify.
ForwardTrace forward(const std::string& clause_text, const MemoryNetModel& model,
                     const EncodedMemory& mem);

// Encode every rationale with the model's tokenizer and embeddings, KB order
// preserved.
EncodedMemory encode_kb(const KnowledgeBase& kb, const MemoryNetModel& model);

}  // namespace rationmem
