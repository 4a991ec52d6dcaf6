#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rationmem/corpus.hpp"
#include "rationmem/memory_net.hpp"

namespace rationmem {

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;
};

struct EvaluationReport {
    Category category = Category::ltd;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    // Fraction of gold-annotated unfair clauses whose memory was correctly
    // used; absent when the evaluation set has none.
    std::optional<double> memory_selection_accuracy;
    ConfusionCounts counts;
    std::size_t n = 0;
};

// Positive class = unfair. Predicted positive iff probability > threshold
// (a tie predicts fair). With no predicted and no gold positives, P, R and
// F1 are 0 and accuracy is 1.
EvaluationReport classify_metrics(const std::vector<std::pair<double, int>>& predictions,
                                  double threshold = 0.5);

struct Explanation {
    std::string clause_id;
    double predicted_probability = 0.0;
    // All KB rationales sorted by gate weight descending, ties in KB order.
    std::vector<std::pair<std::string, double>> ranked_rationales;
    // Rationales whose gate exceeds the selection threshold.
    std::set<std::string> selected;
    std::size_t top_k = 0;  // rendering depth, clipped to the KB size
};

// The footnote rule: memory is correctly used iff at least one gold
// rationale's gate exceeds the threshold.
bool memory_selection_correct(const Explanation& explanation, const std::set<std::string>& gold,
                              double threshold = 0.5);

Explanation explain(const std::string& clause_text, const MemoryNetModel& model,
                    const KnowledgeBase& kb, std::size_t top_k,
                    double selection_threshold = 0.5);

// Same ranking but against an already-encoded memory (used in bulk paths).
Explanation explain_with_memory(const std::string& clause_text, const std::string& clause_id,
                                const MemoryNetModel& model, const EncodedMemory& mem,
                                std::size_t top_k, double selection_threshold = 0.5);

// Human-readable block with the rationale texts of the top-K entries.
std::string format_explanation(const Explanation& explanation, const KnowledgeBase& kb);

EvaluationReport evaluate(const MemoryNetModel& model, const Corpus& corpus,
                          const KnowledgeBase& kb, double threshold = 0.5);

}  // namespace rationmem
