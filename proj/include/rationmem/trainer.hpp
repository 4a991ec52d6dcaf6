#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rationmem/corpus.hpp"
#include "rationmem/memory_net.hpp"
#include "rationmem/objective.hpp"

namespace rationmem {

enum class OptimizerKind { sgd, adam };

std::string_view optimizer_id(OptimizerKind k);
std::optional<OptimizerKind> parse_optimizer(std::string_view id);

struct TrainingConfig {
    std::size_t embedding_dim = 64;
    double gamma = 0.3;
    double lambda = 1.0;
    double learning_rate = 1e-3;
    OptimizerKind optimizer = OptimizerKind::adam;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::size_t epochs = 500;
    std::size_t batch_size = 16;
    std::uint64_t seed = 1;
    std::size_t min_token_count = 1;
    std::size_t early_stop_patience = 20;
    // When false the memory read is treated as constant w.r.t. the
    // embeddings: no gradient flows into rationale-token rows through m_i.
    bool train_memory_embeddings = true;

    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double classification_loss = 0.0;
    double strong_supervision_loss = 0.0;
    double total_loss = 0.0;
    double val_f1 = 0.0;
    std::optional<double> val_memory_selection_accuracy;
};

using TrainHistory = std::vector<EpochRecord>;

// Exact gradients of total_loss w.r.t. every model parameter, including the
// embedding rows of both the clause tokens and every rationale's tokens.
// `trace` must come from forward() on the same model and memory.
ParamStore backward(const ForwardTrace& trace, int y, const std::optional<SupervisionSets>& sup,
                    double gamma, double lambda, const MemoryNetModel& model,
                    const EncodedMemory& mem, bool train_memory_embeddings = true);

struct OptimizerState {
    ParamStore first_moment;
    ParamStore second_moment;
    std::size_t step_count = 0;
    bool initialized = false;
};

// SGD: theta -= lr * g. Adam: bias-corrected moments, standard update.
void step(ParamStore& params, const ParamStore& grads, OptimizerState& state,
          const TrainingConfig& config);

struct TrainResult {
    MemoryNetModel model;
    TrainHistory history;
};

// Mini-batch training with per-batch mean loss, seeded epoch shuffling,
// memory re-encoding after every update, and early stopping on validation F1
// (memory-selection accuracy breaks ties). Returns the best-validation model.
TrainResult train(const Corpus& train_set, const Corpus& val_set, const KnowledgeBase& kb,
                  const TrainingConfig& config);

struct TrainingSample {
    std::string text;
    int label = 0;
    std::optional<SupervisionSets> supervision;
};

struct GradCheckReport {
    double max_relative_error = 0.0;
    std::string worst_parameter;
    double tolerance = 0.0;
    bool passed = false;
};

// Compares backward() against the central-difference oracle on total_loss.
// Relative error per parameter: |a - b| / max(|a|, |b|, 1e-8).
GradCheckReport gradient_check(const MemoryNetModel& model, const TrainingSample& sample,
                               const KnowledgeBase& kb, double gamma, double lambda,
                               double eps = 1e-6, double tolerance = 1e-5);

}  // namespace rationmem
