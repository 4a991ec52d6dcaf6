#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

#include "rationmem/corpus.hpp"
#include "rationmem/memory_net.hpp"

namespace rationmem {

// Target and non-target rationale IDs for one unfair clause. For strongly
// supervised training the two sets partition the category's KB.
struct SupervisionSets {
    std::set<std::string> positives;
    std::set<std::string> negatives;
};

// positives = the clause's gold IDs, negatives = every other KB rationale.
SupervisionSets make_supervision(const std::set<std::string>& gold, const KnowledgeBase& kb);

struct LossBreakdown {
    double classification = 0.0;
    double strong_supervision = 0.0;
    double total = 0.0;
    double lambda = 0.0;
    double gamma = 0.0;
};

// Binary cross-entropy with the probability clamped to [1e-12, 1 - 1e-12].
double bce_loss(double p, int y);

// max(0, gamma - w_plus + w_minus) on already-gated values.
double margin_pair_loss(double w_plus, double w_minus, double gamma);

// Mean margin loss over all (positive, negative) pairs. The 1/N batch
// average lives in the trainer.
double strong_supervision_loss(const std::map<std::string, double>& gate_by_id,
                               const SupervisionSets& sup, double gamma);

// classification + lambda * strong supervision. The supervision term applies
// only when `sup` is present and the clause is unfair (y == 1).
LossBreakdown total_loss(const ForwardTrace& trace, const EncodedMemory& mem, int y,
                         const std::optional<SupervisionSets>& sup, double gamma, double lambda);

}  // namespace rationmem
