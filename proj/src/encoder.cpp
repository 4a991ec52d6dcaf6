#include "rationmem/encoder.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace rationmem {

namespace {

bool is_space_byte(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_punct_byte(unsigned char c) {
    return c < 0x80 && std::ispunct(c) != 0;
}

char lower_byte(unsigned char c) {
    return static_cast<char>(c < 0x80 ? std::tolower(c) : c);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        while (i < n && is_space_byte(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < n && !is_space_byte(static_cast<unsigned char>(text[i]))) ++i;
        if (i == start) continue;
        std::size_t lo = start;
        std::size_t hi = i;  // one past end
        while (lo < hi && is_punct_byte(static_cast<unsigned char>(text[lo]))) ++lo;
        while (hi > lo && is_punct_byte(static_cast<unsigned char>(text[hi - 1]))) --hi;
        if (lo == hi) continue;
        std::string token;
        token.reserve(hi - lo);
        for (std::size_t k = lo; k < hi; ++k) {
            token.push_back(lower_byte(static_cast<unsigned char>(text[k])));
        }
        out.push_back(std::move(token));
    }
    return out;
}

Vocabulary::Vocabulary() {
    index_to_token_.emplace_back(kUnkToken);
    token_to_index_[std::string(kUnkToken)] = kUnkIndex;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens) {
    if (tokens.empty() || tokens[0] != kUnkToken) {
        throw std::invalid_argument("Vocabulary: index 0 must be the unknown token");
    }
    index_to_token_ = std::move(tokens);
    for (std::size_t i = 0; i < index_to_token_.size(); ++i) {
        auto [it, inserted] = token_to_index_.emplace(index_to_token_[i], i);
        if (!inserted) {
            throw std::invalid_argument("Vocabulary: duplicate token '" + index_to_token_[i] + "'");
        }
    }
}

std::size_t Vocabulary::index_of(std::string_view token) const {
    auto it = token_to_index_.find(std::string(token));
    return it == token_to_index_.end() ? kUnkIndex : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
    return token_to_index_.count(std::string(token)) != 0;
}

const std::string& Vocabulary::token_at(std::size_t index) const {
    if (index >= index_to_token_.size()) {
        throw std::out_of_range("Vocabulary: index out of range");
    }
    return index_to_token_[index];
}

Vocabulary build_vocab(const std::vector<std::string>& texts, std::size_t min_count) {
    if (min_count < 1) {
        throw std::invalid_argument("build_vocab: min_count must be >= 1");
    }
    std::unordered_map<std::string, std::size_t> counts;
    for (const std::string& text : texts) {
        for (std::string& token : tokenize(text)) {
            ++counts[std::move(token)];
        }
    }
    std::vector<std::pair<std::string, std::size_t>> kept;
    kept.reserve(counts.size());
    for (auto& [token, count] : counts) {
        if (count >= min_count) kept.emplace_back(token, count);
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::string> tokens;
    tokens.reserve(kept.size() + 1);
    tokens.emplace_back(Vocabulary::kUnkToken);
    for (auto& [token, count] : kept) tokens.push_back(std::move(token));
    return Vocabulary(std::move(tokens));
}

EmbeddingTable EmbeddingTable::random_init(std::size_t vocab_size, std::size_t dim, Rng& rng,
                                           double stddev) {
    if (dim < 1) {
        throw std::invalid_argument("EmbeddingTable: dim must be >= 1");
    }
    EmbeddingTable table;
    table.matrix = Mat64(vocab_size, dim);
    for (double& x : table.matrix.values) {
        x = rng.normal(0.0, stddev);
    }
    return table;
}

std::vector<std::size_t> token_indices(const std::vector<std::string>& tokens,
                                       const Vocabulary& vocab) {
    std::vector<std::size_t> indices;
    indices.reserve(tokens.size());
    for (const std::string& token : tokens) {
        indices.push_back(vocab.index_of(token));
    }
    return indices;
}

Vec64 encode_indices(const std::vector<std::size_t>& indices, const Mat64& embeddings) {
    Vec64 out(embeddings.cols, 0.0);
    if (indices.empty()) return out;
    for (std::size_t idx : indices) {
        const double* row = embeddings.row(idx);
        for (std::size_t k = 0; k < embeddings.cols; ++k) out[k] += row[k];
    }
    const double inv = 1.0 / static_cast<double>(indices.size());
    for (std::size_t k = 0; k < embeddings.cols; ++k) out[k] *= inv;
    return out;
}

Vec64 encode(const std::vector<std::string>& tokens, const Vocabulary& vocab,
             const Mat64& embeddings) {
    if (embeddings.rows != vocab.size()) {
        throw std::invalid_argument("encode: embedding rows do not match vocabulary size");
    }
    return encode_indices(token_indices(tokens, vocab), embeddings);
}

Vec64 encode(const std::vector<std::string>& tokens, const Vocabulary& vocab,
             const EmbeddingTable& emb) {
    return encode(tokens, vocab, emb.matrix);
}

}  // namespace rationmem
