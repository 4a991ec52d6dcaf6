#include "rationmem/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "rationmem/encoder.hpp"
#include "rationmem/rng.hpp"

namespace rationmem {

using nlohmann::json;

std::string_view category_id(Category c) {
    switch (c) {
        case Category::ltd: return "ltd";
        case Category::cr: return "cr";
        case Category::ter: return "ter";
        case Category::ch: return "ch";
        case Category::a: return "a";
    }
    return "";
}

std::string_view category_display_name(Category c) {
    switch (c) {
        case Category::ltd: return "Limitation of liability";
        case Category::cr: return "Content removal";
        case Category::ter: return "Unilateral termination";
        case Category::ch: return "Unilateral changes";
        case Category::a: return "Arbitration";
    }
    return "";
}

std::optional<Category> parse_category(std::string_view id) {
    for (Category c : kAllCategories) {
        if (category_id(c) == id) return c;
    }
    return std::nullopt;
}

std::string_view label_id(Label l) {
    switch (l) {
        case Label::fair: return "fair";
        case Label::potentially_unfair: return "potentially_unfair";
        case Label::clearly_unfair: return "clearly_unfair";
    }
    return "";
}

std::optional<Label> parse_label(std::string_view id) {
    if (id == "fair") return Label::fair;
    if (id == "potentially_unfair") return Label::potentially_unfair;
    if (id == "clearly_unfair") return Label::clearly_unfair;
    return std::nullopt;
}

const RationaleEntry* KnowledgeBase::find(std::string_view id) const {
    for (const RationaleEntry& e : entries) {
        if (e.id == id) return &e;
    }
    return nullptr;
}

std::set<std::string> KnowledgeBase::ids() const {
    std::set<std::string> out;
    for (const RationaleEntry& e : entries) out.insert(e.id);
    return out;
}

Label Clause::label_for(Category c) const {
    auto it = labels.find(c);
    return it == labels.end() ? Label::fair : it->second;
}

const std::set<std::string>* Clause::gold_for(Category c) const {
    auto it = gold_rationales.find(c);
    if (it == gold_rationales.end() || it->second.empty()) return nullptr;
    return &it->second;
}

namespace {

[[noreturn]] void fail_line(std::size_t line, const std::string& what) {
    std::ostringstream msg;
    msg << "line " << line << ": " << what;
    throw DataError(msg.str());
}

Category parse_category_or_fail(std::size_t line, const std::string& id) {
    auto c = parse_category(id);
    if (!c) fail_line(line, "unknown category '" + id + "'");
    return *c;
}

// Clause record: exactly {id, document_id, text, labels, gold_rationales}.
// Document record: exactly {document_id, name}.
Clause parse_clause_record(std::size_t line, const json& rec) {
    static const std::set<std::string> allowed = {"id", "document_id", "text", "labels",
                                                  "gold_rationales"};
    for (auto it = rec.begin(); it != rec.end(); ++it) {
        if (!allowed.count(it.key())) fail_line(line, "unknown field '" + it.key() + "'");
    }
    for (const std::string& field : allowed) {
        if (!rec.contains(field)) fail_line(line, "missing field '" + field + "'");
    }
    Clause clause;
    clause.source_line = line;
    if (!rec["id"].is_string()) fail_line(line, "field 'id' must be a string");
    if (!rec["document_id"].is_string()) fail_line(line, "field 'document_id' must be a string");
    if (!rec["text"].is_string()) fail_line(line, "field 'text' must be a string");
    clause.id = rec["id"].get<std::string>();
    clause.document_id = rec["document_id"].get<std::string>();
    clause.text = rec["text"].get<std::string>();
    if (clause.id.empty()) fail_line(line, "field 'id' must be non-empty");
    if (clause.document_id.empty()) fail_line(line, "field 'document_id' must be non-empty");

    if (!rec["labels"].is_object()) fail_line(line, "field 'labels' must be an object");
    for (auto it = rec["labels"].begin(); it != rec["labels"].end(); ++it) {
        const Category c = parse_category_or_fail(line, it.key());
        if (!it.value().is_string()) {
            fail_line(line, "label for '" + it.key() + "' must be a string");
        }
        const std::string raw = it.value().get<std::string>();
        auto label = parse_label(raw);
        if (!label) fail_line(line, "unknown label '" + raw + "'");
        if (clause.labels.count(c)) fail_line(line, "duplicate label for category '" + it.key() + "'");
        if (*label != Label::fair) clause.labels[c] = *label;
    }

    if (!rec["gold_rationales"].is_object()) {
        fail_line(line, "field 'gold_rationales' must be an object");
    }
    for (auto it = rec["gold_rationales"].begin(); it != rec["gold_rationales"].end(); ++it) {
        const Category c = parse_category_or_fail(line, it.key());
        if (!it.value().is_array()) {
            fail_line(line, "gold_rationales for '" + it.key() + "' must be an array");
        }
        std::set<std::string> ids;
        for (const json& v : it.value()) {
            if (!v.is_string()) fail_line(line, "gold rationale IDs must be strings");
            if (!ids.insert(v.get<std::string>()).second) {
                fail_line(line, "duplicate gold rationale '" + v.get<std::string>() + "'");
            }
        }
        if (ids.empty()) continue;
        if (clause.label_for(c) == Label::fair) {
            fail_line(line, "gold rationales given for category '" + it.key() +
                                "' but the clause is fair for it");
        }
        clause.gold_rationales[c] = std::move(ids);
    }
    return clause;
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open corpus file: " + path.string());
    }
    Corpus corpus;
    bool have_declarations = false;
    std::unordered_set<std::string> declared_docs;
    std::unordered_set<std::string> clause_ids;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
        json rec;
        try {
            rec = json::parse(raw);
        } catch (const json::exception& e) {
            fail_line(line, std::string("malformed record: ") + e.what());
        }
        if (!rec.is_object()) fail_line(line, "record must be a JSON object");

        if (rec.contains("name")) {
            // Document declaration.
            for (auto it = rec.begin(); it != rec.end(); ++it) {
                if (it.key() != "document_id" && it.key() != "name") {
                    fail_line(line, "unknown field '" + it.key() + "' in document record");
                }
            }
            if (!rec.contains("document_id") || !rec["document_id"].is_string() ||
                !rec["name"].is_string()) {
                fail_line(line, "document record needs string fields 'document_id' and 'name'");
            }
            Document doc{rec["document_id"].get<std::string>(), rec["name"].get<std::string>()};
            if (doc.id.empty()) fail_line(line, "field 'document_id' must be non-empty");
            if (!declared_docs.insert(doc.id).second) {
                fail_line(line, "duplicate document '" + doc.id + "'");
            }
            corpus.documents.push_back(std::move(doc));
            have_declarations = true;
            continue;
        }

        Clause clause = parse_clause_record(line, rec);
        if (!clause_ids.insert(clause.id).second) {
            fail_line(line, "duplicate clause ID '" + clause.id + "'");
        }
        if (have_declarations) {
            if (!declared_docs.count(clause.document_id)) {
                fail_line(line, "unknown document reference '" + clause.document_id + "'");
            }
        } else if (!declared_docs.count(clause.document_id)) {
            // No declarations: documents are derived in first-appearance order.
            declared_docs.insert(clause.document_id);
            corpus.documents.push_back(Document{clause.document_id, clause.document_id});
        }
        corpus.clauses.push_back(std::move(clause));
    }
    return corpus;
}

KnowledgeBase load_kb(const std::filesystem::path& path, Category category) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open knowledge base file: " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("malformed knowledge base file " + path.string() + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("category") || !doc.contains("entries")) {
        throw DataError("knowledge base file must contain 'category' and 'entries': " +
                        path.string());
    }
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (it.key() != "category" && it.key() != "entries" && it.key() != "note") {
            throw DataError("unknown field '" + it.key() + "' in " + path.string());
        }
    }
    const std::string raw_cat = doc["category"].get<std::string>();
    auto parsed = parse_category(raw_cat);
    if (!parsed) throw DataError("unknown category '" + raw_cat + "' in " + path.string());
    if (*parsed != category) {
        throw DataError("knowledge base category mismatch: expected '" +
                        std::string(category_id(category)) + "', file says '" + raw_cat + "'");
    }
    KnowledgeBase kb;
    kb.category = category;
    std::unordered_set<std::string> seen;
    for (const json& e : doc["entries"]) {
        if (!e.is_object() || !e.contains("id") || !e.contains("text")) {
            throw DataError("knowledge base entries need 'id' and 'text': " + path.string());
        }
        RationaleEntry entry;
        entry.id = e["id"].get<std::string>();
        entry.category = category;
        entry.text = e["text"].get<std::string>();
        if (entry.id.empty()) throw DataError("empty rationale ID in " + path.string());
        if (entry.text.empty()) {
            throw DataError("empty rationale text for '" + entry.id + "' in " + path.string());
        }
        if (!seen.insert(entry.id).second) {
            throw DataError("duplicate rationale ID '" + entry.id + "' in " + path.string());
        }
        kb.entries.push_back(std::move(entry));
    }
    if (kb.entries.empty()) {
        throw DataError("knowledge base has no entries: " + path.string());
    }
    return kb;
}

CategoryStats corpus_stats(const Corpus& corpus, Category c) {
    CategoryStats stats;
    std::unordered_set<std::string> docs;
    std::size_t token_total = 0;
    for (const Clause& clause : corpus.clauses) {
        if (!clause.is_unfair(c)) continue;
        ++stats.clause_count;
        docs.insert(clause.document_id);
        token_total += tokenize(clause.text).size();
    }
    stats.document_count = docs.size();
    stats.mean_word_length =
        stats.clause_count == 0
            ? 0.0
            : static_cast<double>(token_total) / static_cast<double>(stats.clause_count);
    return stats;
}

std::map<Category, CategoryStats> corpus_stats(const Corpus& corpus) {
    std::map<Category, CategoryStats> out;
    for (Category c : kAllCategories) out[c] = corpus_stats(corpus, c);
    return out;
}

SplitResult split(const Corpus& corpus, double train_frac, double val_frac, std::uint64_t seed) {
    if (!(train_frac > 0.0) || !(val_frac > 0.0) || train_frac + val_frac > 1.0) {
        throw std::invalid_argument("split: fractions must be positive and sum to at most 1");
    }
    const std::size_t n = corpus.documents.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    const auto n_train = static_cast<std::size_t>(static_cast<double>(n) * train_frac);
    const auto n_val = static_cast<std::size_t>(static_cast<double>(n) * val_frac);
    if (n_train == 0 || n_val == 0 || n_train + n_val >= n) {
        std::ostringstream msg;
        msg << "split: a part would have zero documents (" << n << " documents, fractions "
            << train_frac << "/" << val_frac << ")";
        throw DataError(msg.str());
    }

    // 0 = train, 1 = val, 2 = test
    std::unordered_map<std::string, int> part_of;
    for (std::size_t i = 0; i < n; ++i) {
        const int part = i < n_train ? 0 : (i < n_train + n_val ? 1 : 2);
        part_of[corpus.documents[order[i]].id] = part;
    }

    SplitResult result;
    Corpus* parts[3] = {&result.train, &result.val, &result.test};
    // Original file order within each part keeps the split deterministic and diffable.
    for (const Document& doc : corpus.documents) {
        parts[part_of[doc.id]]->documents.push_back(doc);
    }
    for (const Clause& clause : corpus.clauses) {
        parts[part_of[clause.document_id]]->clauses.push_back(clause);
    }
    return result;
}

std::vector<DanglingGoldId> find_dangling_gold_ids(const Corpus& corpus,
                                                   const std::map<Category, KnowledgeBase>& kbs) {
    std::vector<DanglingGoldId> out;
    for (const Clause& clause : corpus.clauses) {
        for (const auto& [category, ids] : clause.gold_rationales) {
            auto kb_it = kbs.find(category);
            if (kb_it == kbs.end()) continue;
            for (const std::string& id : ids) {
                if (kb_it->second.find(id) == nullptr) {
                    out.push_back(DanglingGoldId{clause.id, category, id, clause.source_line});
                }
            }
        }
    }
    return out;
}

void validate_gold_ids(const Corpus& corpus, const std::map<Category, KnowledgeBase>& kbs) {
    const auto dangling = find_dangling_gold_ids(corpus, kbs);
    if (dangling.empty()) return;
    std::ostringstream msg;
    msg << dangling.size() << " dangling gold rationale ID(s):";
    for (const DanglingGoldId& d : dangling) {
        msg << "\n  clause '" << d.clause_id << "' (line " << d.source_line << "): '"
            << d.rationale_id << "' not in the " << category_id(d.category) << " knowledge base";
    }
    throw DataError(msg.str());
}

}  // namespace rationmem
