#include "rationmem/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace rationmem {

EvaluationReport classify_metrics(const std::vector<std::pair<double, int>>& predictions,
                                  double threshold) {
    if (predictions.empty()) {
        throw std::invalid_argument("classify_metrics: empty prediction list");
    }
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw std::invalid_argument("classify_metrics: threshold must be in (0,1)");
    }
    EvaluationReport report;
    for (const auto& [p, y] : predictions) {
        const bool predicted = p > threshold;
        if (y == 1) {
            predicted ? ++report.counts.tp : ++report.counts.fn;
        } else {
            predicted ? ++report.counts.fp : ++report.counts.tn;
        }
    }
    report.n = predictions.size();
    const auto& c = report.counts;
    report.precision = c.tp + c.fp > 0
                           ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp)
                           : 0.0;
    report.recall = c.tp + c.fn > 0
                        ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn)
                        : 0.0;
    report.f1 = report.precision + report.recall > 0.0
                    ? 2.0 * report.precision * report.recall / (report.precision + report.recall)
                    : 0.0;
    report.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(report.n);
    return report;
}

bool memory_selection_correct(const Explanation& explanation, const std::set<std::string>& gold,
                              double threshold) {
    if (gold.empty()) {
        throw std::invalid_argument(
            "memory_selection_correct: empty gold set (evaluation requires annotations)");
    }
    for (const auto& [id, weight] : explanation.ranked_rationales) {
        if (weight > threshold && gold.count(id)) return true;
    }
    return false;
}

Explanation explain_with_memory(const std::string& clause_text, const std::string& clause_id,
                                const MemoryNetModel& model, const EncodedMemory& mem,
                                std::size_t top_k, double selection_threshold) {
    if (top_k < 1) {
        throw std::invalid_argument("explain: top_k must be >= 1");
    }
    const ForwardTrace trace = forward(clause_text, model, mem);

    Explanation out;
    out.clause_id = clause_id;
    out.predicted_probability = trace.probability;
    out.top_k = std::min(top_k, mem.size());

    std::vector<std::size_t> order(mem.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    // Stable sort keeps KB order on ties.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return trace.weights[a] > trace.weights[b];
    });
    out.ranked_rationales.reserve(mem.size());
    for (std::size_t i : order) {
        out.ranked_rationales.emplace_back(mem.slots[i].id, trace.weights[i]);
        if (trace.weights[i] > selection_threshold) out.selected.insert(mem.slots[i].id);
    }
    return out;
}

Explanation explain(const std::string& clause_text, const MemoryNetModel& model,
                    const KnowledgeBase& kb, std::size_t top_k, double selection_threshold) {
    const EncodedMemory mem = encode_kb(kb, model);
    return explain_with_memory(clause_text, "", model, mem, top_k, selection_threshold);
}

std::string format_explanation(const Explanation& explanation, const KnowledgeBase& kb) {
    std::ostringstream out;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", explanation.predicted_probability);
    if (!explanation.clause_id.empty()) {
        out << "clause " << explanation.clause_id << "\n";
    }
    out << "probability of unfairness: " << buf << "\n";
    const std::size_t shown = std::min(explanation.top_k, explanation.ranked_rationales.size());
    for (std::size_t i = 0; i < shown; ++i) {
        const auto& [id, weight] = explanation.ranked_rationales[i];
        std::snprintf(buf, sizeof(buf), "%.4f", weight);
        const RationaleEntry* entry = kb.find(id);
        out << "  " << (i + 1) << ". [" << buf << "] " << id
            << (explanation.selected.count(id) ? " (selected)" : "") << "\n"
            << "     " << (entry != nullptr ? entry->text : "<rationale text unavailable>")
            << "\n";
    }
    return out.str();
}

EvaluationReport evaluate(const MemoryNetModel& model, const Corpus& corpus,
                          const KnowledgeBase& kb, double threshold) {
    if (corpus.clauses.empty()) {
        throw std::invalid_argument("evaluate: empty corpus");
    }
    const EncodedMemory mem = encode_kb(kb, model);
    const Category category = model.category();

    std::vector<std::pair<double, int>> predictions;
    predictions.reserve(corpus.clauses.size());
    std::size_t gold_annotated = 0;
    std::size_t correctly_used = 0;
    for (const Clause& clause : corpus.clauses) {
        const ForwardTrace trace = forward(clause.text, model, mem);
        const int y = clause.is_unfair(category) ? 1 : 0;
        predictions.emplace_back(trace.probability, y);
        if (y == 1) {
            const std::set<std::string>* gold = clause.gold_for(category);
            if (gold != nullptr) {
                ++gold_annotated;
                for (std::size_t i = 0; i < mem.size(); ++i) {
                    if (trace.weights[i] > threshold && gold->count(mem.slots[i].id)) {
                        ++correctly_used;
                        break;
                    }
                }
            }
        }
    }

    EvaluationReport report = classify_metrics(predictions, threshold);
    report.category = category;
    if (gold_annotated > 0) {
        report.memory_selection_accuracy =
            static_cast<double>(correctly_used) / static_cast<double>(gold_annotated);
    }
    return report;
}

}  // namespace rationmem
