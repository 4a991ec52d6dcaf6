#include "rationmem/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rationmem {

namespace {
constexpr double kProbClamp = 1e-12;
}

SupervisionSets make_supervision(const std::set<std::string>& gold, const KnowledgeBase& kb) {
    SupervisionSets sup;
    for (const RationaleEntry& entry : kb.entries) {
        if (gold.count(entry.id)) {
            sup.positives.insert(entry.id);
        } else {
            sup.negatives.insert(entry.id);
        }
    }
    if (sup.positives.size() != gold.size()) {
        for (const std::string& id : gold) {
            if (kb.find(id) == nullptr) {
                throw DataError("unknown rationale ID '" + id + "' for category '" +
                                std::string(category_id(kb.category)) + "'");
            }
        }
    }
    return sup;
}

double bce_loss(double p, int y) {
    if (y != 0 && y != 1) {
        throw std::invalid_argument("bce_loss: label must be 0 or 1");
    }
    const double clamped = std::min(std::max(p, kProbClamp), 1.0 - kProbClamp);
    return y == 1 ? -std::log(clamped) : -std::log(1.0 - clamped);
}

double margin_pair_loss(double w_plus, double w_minus, double gamma) {
    return std::max(0.0, gamma - w_plus + w_minus);
}

double strong_supervision_loss(const std::map<std::string, double>& gate_by_id,
                               const SupervisionSets& sup, double gamma) {
    if (sup.positives.empty()) {
        throw DataError("strong_supervision_loss: no target rationales (unfair clause without "
                        "gold annotation?)");
    }
    if (sup.negatives.empty()) {
        throw DataError("strong_supervision_loss: no non-target rationales (knowledge base of "
                        "size 1?)");
    }
    auto gate = [&](const std::string& id) {
        auto it = gate_by_id.find(id);
        if (it == gate_by_id.end()) {
            throw std::invalid_argument("strong_supervision_loss: no gate value for '" + id + "'");
        }
        return it->second;
    };
    double acc = 0.0;
    for (const std::string& pos : sup.positives) {
        const double w_plus = gate(pos);
        for (const std::string& neg : sup.negatives) {
            acc += margin_pair_loss(w_plus, gate(neg), gamma);
        }
    }
    const double pairs =
        static_cast<double>(sup.positives.size()) * static_cast<double>(sup.negatives.size());
    return acc / pairs;
}

LossBreakdown total_loss(const ForwardTrace& trace, const EncodedMemory& mem, int y,
                         const std::optional<SupervisionSets>& sup, double gamma, double lambda) {
    if (lambda < 0.0) {
        throw std::invalid_argument("total_loss: lambda must be >= 0");
    }
    if (trace.weights.size() != mem.size()) {
        throw std::invalid_argument("total_loss: trace does not match memory size");
    }
    LossBreakdown out;
    out.lambda = lambda;
    out.gamma = gamma;
    out.classification = bce_loss(trace.probability, y);
    if (sup && y == 1) {
        std::map<std::string, double> gate_by_id;
        for (std::size_t i = 0; i < mem.size(); ++i) {
            gate_by_id[mem.slots[i].id] = trace.weights[i];
        }
        out.strong_supervision = strong_supervision_loss(gate_by_id, *sup, gamma);
    }
    out.total = out.classification + lambda * out.strong_supervision;
    return out;
}

}  // namespace rationmem
