#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rationmem/errors.hpp"

namespace rationmem {

// The five unfairness categories.
enum class Category { ltd, cr, ter, ch, a };

inline constexpr std::array<Category, 5> kAllCategories = {
    Category::ltd, Category::cr, Category::ter, Category::ch, Category::a};

std::string_view category_id(Category c);
std::string_view category_display_name(Category c);
std::optional<Category> parse_category(std::string_view id);

enum class Label { fair, potentially_unfair, clearly_unfair };

std::string_view label_id(Label l);
std::optional<Label> parse_label(std::string_view id);

struct RationaleEntry {
    std::string id;
    Category category = Category::ltd;
    std::string text;
};

// Per-category ordered rationale list; the memory M.
struct KnowledgeBase {
    Category category = Category::ltd;
    std::vector<RationaleEntry> entries;

    const RationaleEntry* find(std::string_view id) const;
    std::set<std::string> ids() const;
};

struct Clause {
    std::string id;
    std::string document_id;
    std::string text;
    // Absent category means fair.
    std::map<Category, Label> labels;
    std::map<Category, std::set<std::string>> gold_rationales;
    std::size_t source_line = 0;  // 1-based line in the corpus file, 0 if synthetic

    Label label_for(Category c) const;
    bool is_unfair(Category c) const { return label_for(c) != Label::fair; }
    // Gold IDs for c, or nullptr when none are annotated.
    const std::set<std::string>* gold_for(Category c) const;
};

struct Document {
    std::string id;
    std::string name;
};

struct Corpus {
    std::vector<Document> documents;
    std::vector<Clause> clauses;
};

// Line-delimited JSON records; see docs/formats.md. Throws DataError with the
// offending line number on malformed records, duplicate clause IDs, unknown
// categories/labels, and unknown document references.
Corpus load_corpus(const std::filesystem::path& path);

// JSON document {category, entries:[{id,text}...]}; entry order is file
// order. Throws DataError on duplicate IDs, an empty entry list, or a
// category mismatch.
KnowledgeBase load_kb(const std::filesystem::path& path, Category category);

struct CategoryStats {
    std::size_t clause_count = 0;    // clauses labeled not-fair for the category
    std::size_t document_count = 0;  // distinct documents containing such a clause
    double mean_word_length = 0.0;   // mean token count of those clauses
};

CategoryStats corpus_stats(const Corpus& corpus, Category c);
std::map<Category, CategoryStats> corpus_stats(const Corpus& corpus);

struct SplitResult {
    Corpus train;
    Corpus val;
    Corpus test;
};

// Document-level split: documents are shuffled with the seeded generator and
// partitioned; clauses follow their document. Throws DataError when any part
// would be empty.
SplitResult split(const Corpus& corpus, double train_frac, double val_frac, std::uint64_t seed);

struct DanglingGoldId {
    std::string clause_id;
    Category category = Category::ltd;
    std::string rationale_id;
    std::size_t source_line = 0;
};

// Every gold rationale ID must resolve in the matching knowledge base.
// Categories without a KB in `kbs` are skipped. Returns all dangling IDs at
// once, in corpus order.
std::vector<DanglingGoldId> find_dangling_gold_ids(const Corpus& corpus,
                                                   const std::map<Category, KnowledgeBase>& kbs);

// Convenience wrapper that throws a DataError listing every dangling ID.
void validate_gold_ids(const Corpus& corpus, const std::map<Category, KnowledgeBase>& kbs);

}  // namespace rationmem
