#include "rationmem/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "rationmem/evaluation.hpp"
#include "rationmem/rng.hpp"

namespace rationmem {

std::string_view optimizer_id(OptimizerKind k) {
    return k == OptimizerKind::sgd ? "sgd" : "adam";
}

std::optional<OptimizerKind> parse_optimizer(std::string_view id) {
    if (id == "sgd") return OptimizerKind::sgd;
    if (id == "adam") return OptimizerKind::adam;
    return std::nullopt;
}

void TrainingConfig::validate() const {
    if (embedding_dim < 1) throw std::invalid_argument("config: embedding_dim must be >= 1");
    if (!(gamma > 0.0)) throw std::invalid_argument("config: gamma must be > 0");
    if (lambda < 0.0) throw std::invalid_argument("config: lambda must be >= 0");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("config: learning_rate must be > 0");
    if (batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
    if (epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
    if (min_token_count < 1) throw std::invalid_argument("config: min_token_count must be >= 1");
}

ParamStore backward(const ForwardTrace& trace, int y, const std::optional<SupervisionSets>& sup,
                    double gamma, double lambda, const MemoryNetModel& model,
                    const EncodedMemory& mem, bool train_memory_embeddings) {
    const std::size_t d = model.embedding_dim();
    const std::size_t n_slots = mem.size();
    if (trace.weights.size() != n_slots || trace.q.dim() != d || trace.q_tilde.dim() != 2 * d) {
        throw std::invalid_argument("backward: trace does not match model/memory shapes");
    }

    ParamStore grads = model.params().zeros_like();
    Mat64& g_emb = grads.mat(MemoryNetModel::kEmbeddingsSlot);
    Mat64& g_sim = grads.mat(MemoryNetModel::kSimilaritySlot);
    Vec64& g_cls_w = grads.vec(MemoryNetModel::kClassifierWSlot);
    Vec64& g_cls_b = grads.vec(MemoryNetModel::kClassifierBSlot);

    const Mat64& sim_w = model.similarity_form();
    const Vec64& cls_w = model.classifier_weights();

    // Classification head: dL/dz = p - y for BCE on sigmoid(z).
    const double dz = trace.probability - static_cast<double>(y);
    g_cls_b[0] += dz;
    for (std::size_t k = 0; k < 2 * d; ++k) g_cls_w[k] += dz * trace.q_tilde[k];

    // q_tilde = [q; c] splits the classifier weights into a query half and a
    // content half.
    Vec64 dq(d, 0.0);
    Vec64 dc(d, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
        dq[k] = dz * cls_w[k];
        dc[k] = dz * cls_w[d + k];
    }

    // Gate gradients. Classification path: c = sum_i w_i m_i.
    std::vector<double> dw(n_slots, 0.0);
    for (std::size_t i = 0; i < n_slots; ++i) {
        dw[i] = dot(dc, mem.slots[i].vec);
    }

    // Strong supervision path: hinge over all (positive, negative) pairs,
    // subgradient 0 at an exactly-zero hinge.
    if (sup && y == 1 && lambda > 0.0) {
        const double pairs = static_cast<double>(sup->positives.size()) *
                             static_cast<double>(sup->negatives.size());
        if (pairs == 0.0) {
            throw DataError("backward: strong supervision requires non-empty positive and "
                            "negative sets");
        }
        const double unit = lambda / pairs;
        for (const std::string& pos : sup->positives) {
            const std::size_t ip = mem.index_of(pos);
            for (const std::string& neg : sup->negatives) {
                const std::size_t in = mem.index_of(neg);
                if (gamma - trace.weights[ip] + trace.weights[in] > 0.0) {
                    dw[ip] -= unit;
                    dw[in] += unit;
                }
            }
        }
    }

    // Through the gates and the bilinear form.
    Vec64 dm(d, 0.0);
    for (std::size_t i = 0; i < n_slots; ++i) {
        const Vec64& m_i = mem.slots[i].vec;
        const double w = trace.weights[i];
        const double ds = dw[i] * w * (1.0 - w);

        // s_i = q^T W m_i
        for (std::size_t r = 0; r < d; ++r) {
            const double* w_row = sim_w.row(r);
            double* g_row = g_sim.row(r);
            double wm = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                g_row[c] += ds * trace.q[r] * m_i[c];
                wm += w_row[c] * m_i[c];
            }
            dq[r] += ds * wm;
        }

        if (train_memory_embeddings) {
            // dL/dm_i = w_i * dc (read path) + ds * W^T q (similarity path)
            for (std::size_t c = 0; c < d; ++c) {
                double wtq = 0.0;
                for (std::size_t r = 0; r < d; ++r) wtq += sim_w.at(r, c) * trace.q[r];
                dm[c] = w * dc[c] + ds * wtq;
            }
            const std::vector<std::size_t>& tokens = mem.slots[i].token_indices;
            if (!tokens.empty()) {
                const double inv = 1.0 / static_cast<double>(tokens.size());
                for (std::size_t idx : tokens) {
                    double* row = g_emb.row(idx);
                    for (std::size_t c = 0; c < d; ++c) row[c] += inv * dm[c];
                }
            }
        }
    }

    // Clause tokens: q is the mean of their embedding rows.
    if (!trace.token_indices.empty()) {
        const double inv = 1.0 / static_cast<double>(trace.token_indices.size());
        for (std::size_t idx : trace.token_indices) {
            double* row = g_emb.row(idx);
            for (std::size_t k = 0; k < d; ++k) row[k] += inv * dq[k];
        }
    }

    return grads;
}

void step(ParamStore& params, const ParamStore& grads, OptimizerState& state,
          const TrainingConfig& config) {
    if (!params.same_shape(grads)) {
        throw std::invalid_argument("step: gradient shapes do not match parameters");
    }
    if (config.optimizer == OptimizerKind::sgd) {
        params.add_scaled(grads, -config.learning_rate);
    } else {
        if (!state.initialized) {
            state.first_moment = params.zeros_like();
            state.second_moment = params.zeros_like();
            state.step_count = 0;
            state.initialized = true;
        }
        ++state.step_count;
        const double b1 = config.adam_beta1;
        const double b2 = config.adam_beta2;
        const double bias1 = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
        const double bias2 = 1.0 - std::pow(b2, static_cast<double>(state.step_count));
        for (std::size_t i = 0; i < params.slot_count(); ++i) {
            double* theta = params.data_at(i);
            const double* g = grads.data_at(i);
            double* m = state.first_moment.data_at(i);
            double* v = state.second_moment.data_at(i);
            const std::size_t n = params.size_at(i);
            for (std::size_t k = 0; k < n; ++k) {
                m[k] = b1 * m[k] + (1.0 - b1) * g[k];
                v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
                const double m_hat = m[k] / bias1;
                const double v_hat = v[k] / bias2;
                theta[k] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
            }
        }
    }
    if (!all_finite(params)) {
        throw TrainingError("step: parameters became non-finite");
    }
}

namespace {

struct PreparedSample {
    const Clause* clause = nullptr;
    int label = 0;
    std::optional<SupervisionSets> supervision;
};

struct ValScore {
    double f1 = -1.0;
    double mem_acc = -1.0;
    double bce = std::numeric_limits<double>::infinity();

    // Lexicographic: F1, then memory-selection accuracy, then (lower)
    // classification loss. The loss tie-break keeps patience from latching
    // onto a noisy early F1 peak on small validation sets where F1 is
    // coarsely quantized.
    bool better_than(const ValScore& other) const {
        if (f1 != other.f1) return f1 > other.f1;
        if (mem_acc != other.mem_acc) return mem_acc > other.mem_acc;
        return bce < other.bce;
    }
};

ValScore score_validation(const MemoryNetModel& model, const Corpus& val_set,
                          const EncodedMemory& mem, std::optional<double>& mem_acc_out) {
    const Category category = model.category();
    std::vector<std::pair<double, int>> predictions;
    predictions.reserve(val_set.clauses.size());
    double bce_sum = 0.0;
    std::size_t gold_annotated = 0;
    std::size_t correctly_used = 0;
    for (const Clause& clause : val_set.clauses) {
        const ForwardTrace trace = forward(clause.text, model, mem);
        const int y = clause.is_unfair(category) ? 1 : 0;
        predictions.emplace_back(trace.probability, y);
        bce_sum += bce_loss(trace.probability, y);
        if (y == 1) {
            if (const std::set<std::string>* gold = clause.gold_for(category)) {
                ++gold_annotated;
                for (std::size_t i = 0; i < mem.size(); ++i) {
                    if (trace.weights[i] > 0.5 && gold->count(mem.slots[i].id)) {
                        ++correctly_used;
                        break;
                    }
                }
            }
        }
    }
    ValScore score;
    score.f1 = classify_metrics(predictions).f1;
    score.bce = bce_sum / static_cast<double>(val_set.clauses.size());
    if (gold_annotated > 0) {
        mem_acc_out = static_cast<double>(correctly_used) / static_cast<double>(gold_annotated);
        score.mem_acc = *mem_acc_out;
    } else {
        mem_acc_out.reset();
    }
    return score;
}

}  // namespace

TrainResult train(const Corpus& train_set, const Corpus& val_set, const KnowledgeBase& kb,
                  const TrainingConfig& config) {
    config.validate();
    if (train_set.clauses.empty()) throw DataError("train: training corpus is empty");
    if (val_set.clauses.empty()) throw DataError("train: validation corpus is empty");
    if (kb.entries.empty()) throw DataError("train: knowledge base is empty");

    const Category category = kb.category;
    const bool strong = config.lambda > 0.0;

    // Supervision check up front: under strong supervision every unfair
    // clause needs at least one gold rationale, and gold IDs must resolve.
    std::vector<PreparedSample> samples;
    samples.reserve(train_set.clauses.size());
    for (const Clause& clause : train_set.clauses) {
        PreparedSample s;
        s.clause = &clause;
        s.label = clause.is_unfair(category) ? 1 : 0;
        if (s.label == 1) {
            const std::set<std::string>* gold = clause.gold_for(category);
            if (gold != nullptr) {
                s.supervision = make_supervision(*gold, kb);  // throws on unknown IDs
            } else if (strong) {
                throw DataError("train: unfair clause '" + clause.id +
                                "' has no gold rationale under strong supervision");
            }
            if (!strong) s.supervision.reset();
        }
        samples.push_back(std::move(s));
    }

    // Shared embedding space: vocabulary covers training clauses and the KB.
    std::vector<std::string> texts;
    texts.reserve(train_set.clauses.size() + kb.entries.size());
    for (const Clause& clause : train_set.clauses) texts.push_back(clause.text);
    for (const RationaleEntry& entry : kb.entries) texts.push_back(entry.text);
    Vocabulary vocab = build_vocab(texts, config.min_token_count);

    MemoryNetModel model(std::move(vocab), config.embedding_dim, category, config.seed);
    EncodedMemory mem = encode_kb(kb, model);

    Rng shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    OptimizerState opt_state;
    TrainHistory history;

    ParamStore best_params = model.params();
    ValScore best_score;
    std::size_t epochs_since_best = 0;

    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);

        double cls_sum = 0.0;
        double ss_sum = 0.0;
        double total_sum = 0.0;

        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(start + config.batch_size, order.size());
            const double inv_batch = 1.0 / static_cast<double>(end - start);
            ParamStore batch_grads = model.params().zeros_like();
            for (std::size_t k = start; k < end; ++k) {
                const PreparedSample& s = samples[order[k]];
                const ForwardTrace trace = forward(s.clause->text, model, mem);
                const LossBreakdown loss = total_loss(trace, mem, s.label, s.supervision,
                                                      config.gamma, config.lambda);
                if (!std::isfinite(loss.total)) {
                    throw TrainingError("train: non-finite loss on clause '" + s.clause->id + "'");
                }
                cls_sum += loss.classification;
                ss_sum += loss.strong_supervision;
                total_sum += loss.total;
                const ParamStore sample_grads =
                    backward(trace, s.label, s.supervision, config.gamma, config.lambda, model,
                             mem, config.train_memory_embeddings);
                batch_grads.add_scaled(sample_grads, inv_batch);
            }
            step(model.params(), batch_grads, opt_state, config);
            mem = encode_kb(kb, model);  // embeddings changed
        }

        const double inv_n = 1.0 / static_cast<double>(samples.size());
        EpochRecord record;
        record.epoch = epoch;
        record.classification_loss = cls_sum * inv_n;
        record.strong_supervision_loss = ss_sum * inv_n;
        record.total_loss = total_sum * inv_n;

        std::optional<double> val_mem_acc;
        const ValScore score = score_validation(model, val_set, mem, val_mem_acc);
        record.val_f1 = score.f1;
        record.val_memory_selection_accuracy = val_mem_acc;
        history.push_back(record);

        if (score.better_than(best_score)) {
            best_score = score;
            best_params = model.params();
            epochs_since_best = 0;
        } else {
            ++epochs_since_best;
            if (epochs_since_best >= config.early_stop_patience) break;
        }
    }

    model.set_params(std::move(best_params));
    return TrainResult{std::move(model), std::move(history)};
}

GradCheckReport gradient_check(const MemoryNetModel& model, const TrainingSample& sample,
                               const KnowledgeBase& kb, double gamma, double lambda, double eps,
                               double tolerance) {
    const EncodedMemory mem = encode_kb(kb, model);
    const ForwardTrace trace = forward(sample.text, model, mem);
    const ParamStore analytic =
        backward(trace, sample.label, sample.supervision, gamma, lambda, model, mem);

    const auto objective = [&](const ParamStore& p) {
        MemoryNetModel probe(model.vocab(), model.category(), p);
        const EncodedMemory probe_mem = encode_kb(kb, probe);
        const ForwardTrace probe_trace = forward(sample.text, probe, probe_mem);
        return total_loss(probe_trace, probe_mem, sample.label, sample.supervision, gamma, lambda)
            .total;
    };
    const ParamStore numeric = finite_diff_grad(objective, model.params(), eps);

    GradCheckReport report;
    report.tolerance = tolerance;
    for (std::size_t i = 0; i < analytic.slot_count(); ++i) {
        const double* a = analytic.data_at(i);
        const double* b = numeric.data_at(i);
        for (std::size_t k = 0; k < analytic.size_at(i); ++k) {
            const double denom = std::max({std::fabs(a[k]), std::fabs(b[k]), 1e-8});
            const double rel = std::fabs(a[k] - b[k]) / denom;
            if (rel > report.max_relative_error) {
                report.max_relative_error = rel;
                std::ostringstream name;
                name << analytic.name_at(i) << "[" << k << "]";
                report.worst_parameter = name.str();
            }
        }
    }
    report.passed = report.max_relative_error <= tolerance;
    return report;
}

}  // namespace rationmem
