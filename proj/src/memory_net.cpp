#include "rationmem/memory_net.hpp"

#include <sstream>
#include <stdexcept>

#include "rationmem/rng.hpp"

namespace rationmem {

// Init scale matters: mean-pooled embeddings enter the similarity form
// bilinearly, so gate gradients scale with the square of this value. 0.5
// keeps sigmoid gates responsive at desk-scale learning rates. The negative
// classifier bias makes an untrained model predict fair outright instead of
// flapping around the 0.5 threshold.
namespace {
constexpr double kEmbeddingInitStddev = 0.5;
constexpr double kClassifierBiasInit = -1.0;
}

MemoryNetModel::MemoryNetModel(Vocabulary vocab, std::size_t embedding_dim, Category category,
                               std::uint64_t init_seed)
    : vocab_(std::move(vocab)), category_(category), embedding_dim_(embedding_dim) {
    if (embedding_dim_ < 1) {
        throw std::invalid_argument("MemoryNetModel: embedding dim must be >= 1");
    }
    Rng rng(init_seed);
    EmbeddingTable emb =
        EmbeddingTable::random_init(vocab_.size(), embedding_dim_, rng, kEmbeddingInitStddev);
    params_.add(std::string(kEmbeddingsSlot), std::move(emb.matrix));
    params_.add(std::string(kSimilaritySlot), Mat64::identity(embedding_dim_));
    params_.add(std::string(kClassifierWSlot), Vec64(2 * embedding_dim_, 0.0));
    params_.add(std::string(kClassifierBSlot), Vec64(1, kClassifierBiasInit));
}

MemoryNetModel::MemoryNetModel(Vocabulary vocab, Category category, ParamStore params)
    : vocab_(std::move(vocab)), category_(category), params_(std::move(params)) {
    embedding_dim_ = params_.mat(kEmbeddingsSlot).cols;
    validate_shapes();
}

void MemoryNetModel::set_params(ParamStore params) {
    params_ = std::move(params);
    validate_shapes();
}

void MemoryNetModel::validate_shapes() const {
    const Mat64& emb = params_.mat(kEmbeddingsSlot);
    const Mat64& sim = params_.mat(kSimilaritySlot);
    const Vec64& cls_w = params_.vec(kClassifierWSlot);
    const Vec64& cls_b = params_.vec(kClassifierBSlot);
    if (emb.rows != vocab_.size()) {
        throw std::invalid_argument("MemoryNetModel: embedding rows != vocabulary size");
    }
    if (emb.cols < 1) {
        throw std::invalid_argument("MemoryNetModel: embedding dim must be >= 1");
    }
    if (sim.rows != emb.cols || sim.cols != emb.cols) {
        throw std::invalid_argument("MemoryNetModel: similarity form must be d x d");
    }
    if (cls_w.dim() != 2 * emb.cols) {
        throw std::invalid_argument("MemoryNetModel: classifier weights must have dim 2d");
    }
    if (cls_b.dim() != 1) {
        throw std::invalid_argument("MemoryNetModel: classifier bias must be a single scalar");
    }
    if (!all_finite(params_)) {
        throw std::invalid_argument("MemoryNetModel: parameters contain non-finite values");
    }
}

std::size_t EncodedMemory::index_of(std::string_view id) const {
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].id == id) return i;
    }
    throw std::invalid_argument("EncodedMemory: no slot with ID '" + std::string(id) + "'");
}

double similarity(const Vec64& q, const Vec64& m, const Mat64& sim_w) {
    if (q.dim() != sim_w.rows || m.dim() != sim_w.cols) {
        std::ostringstream msg;
        msg << "similarity: dimension mismatch (q: " << q.dim() << ", m: " << m.dim()
            << ", form: " << sim_w.rows << "x" << sim_w.cols << ")";
        throw std::invalid_argument(msg.str());
    }
    // q^T W m, row by row.
    double acc = 0.0;
    for (std::size_t r = 0; r < sim_w.rows; ++r) {
        const double* row = sim_w.row(r);
        double inner = 0.0;
        for (std::size_t c = 0; c < sim_w.cols; ++c) inner += row[c] * m[c];
        acc += q[r] * inner;
    }
    return acc;
}

std::vector<double> attention(const Vec64& q, const EncodedMemory& mem, const Mat64& sim_w) {
    std::vector<double> weights;
    weights.reserve(mem.size());
    for (const EncodedMemory::Slot& slot : mem.slots) {
        weights.push_back(sigmoid(similarity(q, slot.vec, sim_w)));
    }
    return weights;
}

Vec64 read_memory(const std::vector<double>& weights, const EncodedMemory& mem) {
    if (weights.size() != mem.size()) {
        std::ostringstream msg;
        msg << "read_memory: " << weights.size() << " weights for " << mem.size() << " slots";
        throw std::invalid_argument(msg.str());
    }
    if (mem.slots.empty()) {
        throw std::invalid_argument("read_memory: memory has no slots");
    }
    Vec64 c(mem.slots[0].vec.dim(), 0.0);
    for (std::size_t i = 0; i < mem.slots.size(); ++i) {
        const Vec64& m = mem.slots[i].vec;
        for (std::size_t k = 0; k < c.dim(); ++k) c[k] += weights[i] * m[k];
    }
    return c;
}

Vec64 update_query(const Vec64& q, const Vec64& c) {
    if (q.dim() != c.dim()) {
        std::ostringstream msg;
        msg << "update_query: dimension mismatch (" << q.dim() << " vs " << c.dim() << ")";
        throw std::invalid_argument(msg.str());
    }
    Vec64 out(2 * q.dim());
    for (std::size_t k = 0; k < q.dim(); ++k) out[k] = q[k];
    for (std::size_t k = 0; k < c.dim(); ++k) out[q.dim() + k] = c[k];
    return out;
}

ForwardTrace forward(const std::string& clause_text, const MemoryNetModel& model,
                     const EncodedMemory& mem) {
    if (mem.category != model.category()) {
        throw std::invalid_argument("forward: memory category does not match model category");
    }
    if (mem.slots.empty()) {
        throw std::invalid_argument("forward: memory has no slots");
    }
    ForwardTrace trace;
    trace.token_indices = token_indices(tokenize(clause_text), model.vocab());
    trace.q = encode_indices(trace.token_indices, model.embeddings());
    trace.scores.reserve(mem.size());
    for (const EncodedMemory::Slot& slot : mem.slots) {
        trace.scores.push_back(similarity(trace.q, slot.vec, model.similarity_form()));
    }
    trace.weights.reserve(mem.size());
    for (double s : trace.scores) trace.weights.push_back(sigmoid(s));
    trace.c = read_memory(trace.weights, mem);
    trace.q_tilde = update_query(trace.q, trace.c);
    trace.probability =
        sigmoid(dot(model.classifier_weights(), trace.q_tilde) + model.classifier_bias());
    return trace;
}

EncodedMemory encode_kb(const KnowledgeBase& kb, const MemoryNetModel& model) {
    if (kb.category != model.category()) {
        throw std::invalid_argument("encode_kb: knowledge base category does not match model");
    }
    if (kb.entries.empty()) {
        throw DataError("encode_kb: knowledge base has no entries");
    }
    EncodedMemory mem;
    mem.category = kb.category;
    mem.slots.reserve(kb.entries.size());
    for (const RationaleEntry& entry : kb.entries) {
        EncodedMemory::Slot slot;
        slot.id = entry.id;
        slot.token_indices = token_indices(tokenize(entry.text), model.vocab());
        slot.vec = encode_indices(slot.token_indices, model.embeddings());
        mem.slots.push_back(std::move(slot));
    }
    return mem;
}

}  // namespace rationmem
