#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rationmem/numeric.hpp"
#include "rationmem/rng.hpp"

namespace rationmem {

// Lowercase, split on whitespace, strip leading/trailing punctuation per
// token, drop tokens that become empty. Deterministic; empty input gives an
// empty list. Operates on bytes: ASCII is lowercased, other bytes pass
// through unchanged.
std::vector<std::string> tokenize(std::string_view text);

// Token <-> index map. Index 0 is always the unknown token; real tokens fill
// the contiguous range [1, size).
class Vocabulary {
public:
    static constexpr std::size_t kUnkIndex = 0;
    static constexpr std::string_view kUnkToken = "<unk>";

    Vocabulary();  // unknown token only

    // From an explicit index->token list (checkpoint restore). tokens[0] must
    // be the unknown token and entries must be unique.
    explicit Vocabulary(std::vector<std::string> tokens);

    std::size_t size() const { return index_to_token_.size(); }
    std::size_t index_of(std::string_view token) const;  // kUnkIndex when absent
    bool contains(std::string_view token) const;
    const std::string& token_at(std::size_t index) const;
    const std::vector<std::string>& tokens() const { return index_to_token_; }

    bool operator==(const Vocabulary& other) const {
        return index_to_token_ == other.index_to_token_;
    }

private:
    std::vector<std::string> index_to_token_;
    std::unordered_map<std::string, std::size_t> token_to_index_;
};

// Tokens with corpus frequency >= min_count get indices in descending
// frequency order, ties broken lexicographically; everything else maps to
// the unknown token.
Vocabulary build_vocab(const std::vector<std::string>& texts, std::size_t min_count);

struct EmbeddingTable {
    Mat64 matrix;  // vocabulary size x embedding dim

    static EmbeddingTable random_init(std::size_t vocab_size, std::size_t dim, Rng& rng,
                                      double stddev);
};

std::vector<std::size_t> token_indices(const std::vector<std::string>& tokens,
                                       const Vocabulary& vocab);

// Mean of the embedding rows of the mapped token indices; zero vector for an
// empty token list.
Vec64 encode(const std::vector<std::string>& tokens, const Vocabulary& vocab,
             const Mat64& embeddings);
Vec64 encode(const std::vector<std::string>& tokens, const Vocabulary& vocab,
             const EmbeddingTable& emb);
Vec64 encode_indices(const std::vector<std::size_t>& indices, const Mat64& embeddings);

}  // namespace rationmem
