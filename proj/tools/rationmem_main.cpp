// rationmem command-line interface: train / eval / predict / explain /
// stats / gradcheck. Exit codes: 0 success, 1 usage error, 2 data
// validation error, 3 training failure.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rationmem/checkpoint.hpp"
#include "rationmem/corpus.hpp"
#include "rationmem/evaluation.hpp"
#include "rationmem/memory_net.hpp"
#include "rationmem/objective.hpp"
#include "rationmem/rng.hpp"
#include "rationmem/trainer.hpp"

namespace {

using nlohmann::json;
using namespace rationmem;

enum class LogLevel { error = 0, info = 1, debug = 2 };

LogLevel g_log_level = LogLevel::info;

void init_log_level() {
    const char* raw = std::getenv("RATIONMEM_LOG");
    if (raw == nullptr) return;
    const std::string value(raw);
    if (value == "error") {
        g_log_level = LogLevel::error;
    } else if (value == "info") {
        g_log_level = LogLevel::info;
    } else if (value == "debug") {
        g_log_level = LogLevel::debug;
    } else {
        std::cerr << "[error] RATIONMEM_LOG must be one of error|info|debug; using info\n";
    }
}

void log_info(const std::string& msg) {
    if (g_log_level >= LogLevel::info) std::cerr << "[info] " << msg << "\n";
}

void log_debug(const std::string& msg) {
    if (g_log_level >= LogLevel::debug) std::cerr << "[debug] " << msg << "\n";
}

struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

Category parse_category_or_usage(const std::string& raw) {
    auto c = parse_category(raw);
    if (!c) {
        throw UsageError("unknown category '" + raw + "' (expected ltd|cr|ter|ch|a)");
    }
    return *c;
}

std::filesystem::path kb_path(const std::string& kb_dir, Category category) {
    return std::filesystem::path(kb_dir) / (std::string(category_id(category)) + ".json");
}

TrainingConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError(std::string("malformed config file: ") + e.what());
    }
    TrainingConfig cfg;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const std::string& key = it.key();
        try {
            if (key == "embedding_dim") cfg.embedding_dim = it.value().get<std::size_t>();
            else if (key == "gamma") cfg.gamma = it.value().get<double>();
            else if (key == "lambda") cfg.lambda = it.value().get<double>();
            else if (key == "learning_rate") cfg.learning_rate = it.value().get<double>();
            else if (key == "optimizer") {
                auto opt = parse_optimizer(it.value().get<std::string>());
                if (!opt) throw UsageError("config: optimizer must be sgd or adam");
                cfg.optimizer = *opt;
            }
            else if (key == "adam_beta1") cfg.adam_beta1 = it.value().get<double>();
            else if (key == "adam_beta2") cfg.adam_beta2 = it.value().get<double>();
            else if (key == "adam_epsilon") cfg.adam_epsilon = it.value().get<double>();
            else if (key == "epochs") cfg.epochs = it.value().get<std::size_t>();
            else if (key == "batch_size") cfg.batch_size = it.value().get<std::size_t>();
            else if (key == "seed") cfg.seed = it.value().get<std::uint64_t>();
            else if (key == "min_token_count") cfg.min_token_count = it.value().get<std::size_t>();
            else if (key == "early_stop_patience")
                cfg.early_stop_patience = it.value().get<std::size_t>();
            else if (key == "train_memory_embeddings")
                cfg.train_memory_embeddings = it.value().get<bool>();
            else throw UsageError("config: unknown key '" + key + "'");
        } catch (const json::exception& e) {
            throw UsageError("config: bad value for '" + key + "': " + e.what());
        }
    }
    return cfg;
}

std::string format_probability(double p) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", p);
    return buf;
}

json report_to_json(const EvaluationReport& report) {
    json j;
    j["category"] = std::string(category_id(report.category));
    j["precision"] = report.precision;
    j["recall"] = report.recall;
    j["f1"] = report.f1;
    j["accuracy"] = report.accuracy;
    if (report.memory_selection_accuracy) {
        j["memory_selection_accuracy"] = *report.memory_selection_accuracy;
    } else {
        j["memory_selection_accuracy"] = nullptr;
    }
    j["n"] = report.n;
    return j;
}

void print_report(std::ostream& out, const EvaluationReport& report) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "category: %s\nn: %zu (tp %zu, fp %zu, tn %zu, fn %zu)\n"
                  "precision: %.4f\nrecall: %.4f\nf1: %.4f\naccuracy: %.4f\n",
                  std::string(category_id(report.category)).c_str(), report.n, report.counts.tp,
                  report.counts.fp, report.counts.tn, report.counts.fn, report.precision,
                  report.recall, report.f1, report.accuracy);
    out << buf;
    if (report.memory_selection_accuracy) {
        std::snprintf(buf, sizeof(buf), "memory_selection_accuracy: %.4f\n",
                      *report.memory_selection_accuracy);
        out << buf;
    } else {
        out << "memory_selection_accuracy: n/a (no gold-annotated unfair clauses)\n";
    }
}

// ---------------------------------------------------------------- train ----

struct TrainArgs {
    std::string corpus_path;
    std::string kb_dir;
    std::string category;
    std::string config_path;
    std::string out_dir;
    bool weak = false;
    double train_frac = 0.8;
    double val_frac = 0.1;
    std::optional<std::uint64_t> seed;
    std::optional<double> lambda;
    std::optional<double> gamma;
    std::optional<std::size_t> epochs;
};

int run_train(const TrainArgs& args) {
    const Category category = parse_category_or_usage(args.category);
    TrainingConfig cfg =
        args.config_path.empty() ? TrainingConfig{} : load_config_file(args.config_path);
    if (args.seed) cfg.seed = *args.seed;
    if (args.gamma) cfg.gamma = *args.gamma;
    if (args.epochs) cfg.epochs = *args.epochs;
    if (args.lambda) {
        if (args.weak && *args.lambda != 0.0) {
            throw UsageError("--weak and a nonzero --lambda are contradictory");
        }
        cfg.lambda = *args.lambda;
    }
    if (args.weak) cfg.lambda = 0.0;

    const Corpus corpus = load_corpus(args.corpus_path);
    const KnowledgeBase kb = load_kb(kb_path(args.kb_dir, category), category);
    validate_gold_ids(corpus, {{category, kb}});

    const SplitResult parts = split(corpus, args.train_frac, args.val_frac, cfg.seed);
    log_info("split: " + std::to_string(parts.train.clauses.size()) + " train / " +
             std::to_string(parts.val.clauses.size()) + " val / " +
             std::to_string(parts.test.clauses.size()) + " test clauses");

    const TrainResult result = train(parts.train, parts.val, kb, cfg);
    log_info("trained " + std::to_string(result.history.size()) + " epochs");
    for (const EpochRecord& r : result.history) {
        std::ostringstream line;
        line << "epoch " << r.epoch << ": total " << r.total_loss << ", val f1 " << r.val_f1;
        log_debug(line.str());
    }

    std::filesystem::create_directories(args.out_dir);
    const auto out = std::filesystem::path(args.out_dir);
    save_checkpoint(out / "checkpoint.rmck", result.model, cfg);
    {
        std::ofstream hist(out / "history.jsonl");
        for (const EpochRecord& r : result.history) {
            json j;
            j["epoch"] = r.epoch;
            j["classification_loss"] = r.classification_loss;
            j["strong_supervision_loss"] = r.strong_supervision_loss;
            j["total_loss"] = r.total_loss;
            j["val_f1"] = r.val_f1;
            if (r.val_memory_selection_accuracy) {
                j["val_memory_selection_accuracy"] = *r.val_memory_selection_accuracy;
            } else {
                j["val_memory_selection_accuracy"] = nullptr;
            }
            hist << j.dump() << "\n";
        }
    }

    const EvaluationReport final_report = evaluate(result.model, parts.val, kb);
    std::cout << "final validation metrics\n";
    print_report(std::cout, final_report);
    return 0;
}

// ----------------------------------------------------------------- eval ----

int run_eval(const std::string& checkpoint_path, const std::string& corpus_path,
             const std::string& kb_dir, const std::string& out_dir, double threshold) {
    const LoadedCheckpoint loaded = load_checkpoint(checkpoint_path);
    const Category category = loaded.model.category();
    const KnowledgeBase kb = load_kb(kb_path(kb_dir, category), category);
    const Corpus corpus = load_corpus(corpus_path);

    const EvaluationReport report = evaluate(loaded.model, corpus, kb, threshold);
    print_report(std::cout, report);

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        const auto out = std::filesystem::path(out_dir);
        {
            std::ofstream f(out / "eval_report.json");
            f << report_to_json(report).dump(2) << "\n";
        }
        const EncodedMemory mem = encode_kb(kb, loaded.model);
        std::ofstream f(out / "explanations.jsonl");
        for (const Clause& clause : corpus.clauses) {
            const Explanation ex = explain_with_memory(clause.text, clause.id, loaded.model, mem,
                                                       mem.size(), threshold);
            json j;
            j["clause_id"] = ex.clause_id;
            j["probability"] = ex.predicted_probability;
            json ranked = json::array();
            for (const auto& [id, weight] : ex.ranked_rationales) {
                ranked.push_back(json{{"id", id}, {"weight", weight}});
            }
            j["ranked"] = std::move(ranked);
            j["selected"] = ex.selected;
            f << j.dump() << "\n";
        }
    }
    return 0;
}

// -------------------------------------------------------------- predict ----

int run_predict(const std::string& checkpoint_path, const std::string& kb_dir,
                const std::string& input_path) {
    const LoadedCheckpoint loaded = load_checkpoint(checkpoint_path);
    const KnowledgeBase kb =
        load_kb(kb_path(kb_dir, loaded.model.category()), loaded.model.category());
    const EncodedMemory mem = encode_kb(kb, loaded.model);

    std::ifstream file;
    if (!input_path.empty()) {
        file.open(input_path);
        if (!file) throw DataError("cannot open input file: " + input_path);
    }
    std::istream& in = input_path.empty() ? std::cin : file;
    std::string line;
    while (std::getline(in, line)) {
        const ForwardTrace trace = forward(line, loaded.model, mem);
        std::cout << format_probability(trace.probability) << "\n";
    }
    return 0;
}

// -------------------------------------------------------------- explain ----

int run_explain(const std::string& checkpoint_path, const std::string& kb_dir,
                const std::string& text, const std::string& corpus_path,
                const std::string& clause_id, std::size_t top_k) {
    if (text.empty() == (corpus_path.empty() || clause_id.empty())) {
        throw UsageError("explain needs either --text or both --corpus and --clause-id");
    }
    const LoadedCheckpoint loaded = load_checkpoint(checkpoint_path);
    const KnowledgeBase kb =
        load_kb(kb_path(kb_dir, loaded.model.category()), loaded.model.category());

    std::string clause_text = text;
    std::string id;
    if (text.empty()) {
        const Corpus corpus = load_corpus(corpus_path);
        const Clause* found = nullptr;
        for (const Clause& clause : corpus.clauses) {
            if (clause.id == clause_id) {
                found = &clause;
                break;
            }
        }
        if (found == nullptr) throw DataError("no clause with ID '" + clause_id + "'");
        clause_text = found->text;
        id = found->id;
    }
    const EncodedMemory mem = encode_kb(kb, loaded.model);
    const Explanation ex = explain_with_memory(clause_text, id, loaded.model, mem, top_k);
    std::cout << format_explanation(ex, kb);
    return 0;
}

// ---------------------------------------------------------------- stats ----

int run_stats(const std::string& corpus_path) {
    const Corpus corpus = load_corpus(corpus_path);
    const auto stats = corpus_stats(corpus);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-3s  %-24s  %8s  %10s  %10s\n", "id", "category", "clauses",
                  "documents", "avg_words");
    std::cout << buf;
    for (Category c : kAllCategories) {
        const CategoryStats& s = stats.at(c);
        std::snprintf(buf, sizeof(buf), "%-3s  %-24s  %8zu  %10zu  %10.2f\n",
                      std::string(category_id(c)).c_str(),
                      std::string(category_display_name(c)).c_str(), s.clause_count,
                      s.document_count, s.mean_word_length);
        std::cout << buf;
    }
    return 0;
}

// ------------------------------------------------------------ gradcheck ----

// Small synthetic instances: random vocabulary, KB and clause; hinge
// boundaries are resampled away since the subgradient is not comparable
// against central differences there.
int run_gradcheck(std::uint64_t seed, std::size_t cases, std::size_t dim, double eps,
                  double tolerance) {
    Rng rng(seed);
    const double lambdas[3] = {0.0, 0.5, 2.0};
    double worst = 0.0;
    std::string worst_param;

    for (std::size_t n = 0; n < cases; ++n) {
        const double lambda = lambdas[n % 3];
        const double gamma = 0.3;
        for (int attempt = 0; attempt < 100; ++attempt) {
            std::vector<std::string> words;
            for (int w = 0; w < 12; ++w) words.push_back("w" + std::to_string(w));
            auto random_text = [&](std::size_t lo, std::size_t hi) {
                const std::size_t len = lo + rng.index(hi - lo + 1);
                std::string text;
                for (std::size_t t = 0; t < len; ++t) {
                    if (t > 0) text += ' ';
                    text += words[rng.index(words.size())];
                }
                return text;
            };

            KnowledgeBase kb;
            kb.category = Category::ter;
            for (int r = 0; r < 3; ++r) {
                kb.entries.push_back(
                    RationaleEntry{"r" + std::to_string(r), kb.category, random_text(3, 6)});
            }
            std::vector<std::string> texts{random_text(3, 8)};
            for (const auto& e : kb.entries) texts.push_back(e.text);
            Vocabulary vocab = build_vocab(texts, 1);
            MemoryNetModel model(std::move(vocab), dim, kb.category, rng.next_u64());
            // Nonzero classifier weights so every path carries signal.
            for (double& x : model.classifier_weights().values) x = rng.normal(0.0, 0.5);
            model.set_classifier_bias(rng.normal(0.0, 0.2));
            for (double& x : model.similarity_form().values) x += rng.normal(0.0, 0.2);

            TrainingSample sample;
            sample.text = texts[0];
            sample.label = static_cast<int>(rng.index(2));
            if (sample.label == 1 && lambda > 0.0) {
                std::set<std::string> gold{"r" + std::to_string(rng.index(3))};
                sample.supervision = make_supervision(gold, kb);
            }

            // Reject instances near a hinge boundary.
            if (sample.supervision) {
                const EncodedMemory mem = encode_kb(kb, model);
                const ForwardTrace trace = forward(sample.text, model, mem);
                bool near_boundary = false;
                for (const std::string& pos : sample.supervision->positives) {
                    for (const std::string& neg : sample.supervision->negatives) {
                        const double margin = gamma - trace.weights[mem.index_of(pos)] +
                                              trace.weights[mem.index_of(neg)];
                        if (std::fabs(margin) < 1e-4) near_boundary = true;
                    }
                }
                if (near_boundary) continue;
            }

            const GradCheckReport report =
                gradient_check(model, sample, kb, gamma, lambda, eps, tolerance);
            if (report.max_relative_error > worst) {
                worst = report.max_relative_error;
                worst_param = report.worst_parameter;
            }
            break;
        }
    }

    char buf[160];
    std::snprintf(buf, sizeof(buf), "max relative error: %.3e (tolerance %.1e) worst: %s\n", worst,
                  tolerance, worst_param.empty() ? "-" : worst_param.c_str());
    std::cout << buf;
    return worst <= tolerance ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    init_log_level();
    CLI::App app{"Memory-augmented classifier for potentially unfair contract clauses"};
    app.require_subcommand(1);

    TrainArgs train_args;
    auto* cmd_train = app.add_subcommand("train", "Train a model for one category");
    cmd_train->add_option("--corpus", train_args.corpus_path, "Corpus file (JSON lines)")
        ->required();
    cmd_train->add_option("--kb-dir", train_args.kb_dir, "Directory with <category>.json KB files")
        ->required();
    cmd_train->add_option("--category", train_args.category, "Category ID (ltd|cr|ter|ch|a)")
        ->required();
    cmd_train->add_option("--config", train_args.config_path, "Training config JSON file");
    cmd_train->add_option("--out", train_args.out_dir, "Output directory")->required();
    cmd_train->add_flag("--weak", train_args.weak,
                        "Weak supervision: force the strong-supervision coefficient to 0");
    cmd_train->add_option("--train-frac", train_args.train_frac, "Document fraction for training");
    cmd_train->add_option("--val-frac", train_args.val_frac, "Document fraction for validation");
    std::uint64_t seed_opt = 0;
    double lambda_opt = 0.0, gamma_opt = 0.0;
    std::size_t epochs_opt = 0;
    auto* seed_flag = cmd_train->add_option("--seed", seed_opt, "Seed override");
    auto* lambda_flag =
        cmd_train->add_option("--lambda", lambda_opt, "Strong-supervision coefficient override");
    auto* gamma_flag = cmd_train->add_option("--gamma", gamma_opt, "Margin override");
    auto* epochs_flag = cmd_train->add_option("--epochs", epochs_opt, "Epoch count override");

    std::string eval_checkpoint, eval_corpus, eval_kb_dir, eval_out;
    double eval_threshold = 0.5;
    auto* cmd_eval = app.add_subcommand("eval", "Evaluate a checkpoint on a corpus");
    cmd_eval->add_option("--checkpoint", eval_checkpoint, "Checkpoint file")->required();
    cmd_eval->add_option("--corpus", eval_corpus, "Corpus file")->required();
    cmd_eval->add_option("--kb-dir", eval_kb_dir, "KB directory")->required();
    cmd_eval->add_option("--out", eval_out, "Directory for report + explanation records");
    cmd_eval->add_option("--threshold", eval_threshold, "Decision threshold (default 0.5)");

    std::string pred_checkpoint, pred_kb_dir, pred_input;
    auto* cmd_predict = app.add_subcommand("predict", "Print a probability per input line");
    cmd_predict->add_option("--checkpoint", pred_checkpoint, "Checkpoint file")->required();
    cmd_predict->add_option("--kb-dir", pred_kb_dir, "KB directory")->required();
    cmd_predict->add_option("--input", pred_input, "Input file (default: stdin)");

    std::string exp_checkpoint, exp_kb_dir, exp_text, exp_corpus, exp_clause_id;
    std::size_t exp_top_k = 3;
    auto* cmd_explain = app.add_subcommand("explain", "Rank rationales for one clause");
    cmd_explain->add_option("--checkpoint", exp_checkpoint, "Checkpoint file")->required();
    cmd_explain->add_option("--kb-dir", exp_kb_dir, "KB directory")->required();
    cmd_explain->add_option("--text", exp_text, "Clause text");
    cmd_explain->add_option("--corpus", exp_corpus, "Corpus file (with --clause-id)");
    cmd_explain->add_option("--clause-id", exp_clause_id, "Clause ID within --corpus");
    cmd_explain->add_option("--top-k", exp_top_k, "How many rationales to print (default 3)");

    std::string stats_corpus;
    auto* cmd_stats = app.add_subcommand("stats", "Per-category corpus statistics");
    cmd_stats->add_option("--corpus", stats_corpus, "Corpus file")->required();

    std::uint64_t gc_seed = 1;
    std::size_t gc_cases = 10, gc_dim = 4;
    // 1e-4 keeps the oracle's own float64 rounding noise safely below the
    // tolerance; 1e-6 would dominate near-zero gradient entries.
    double gc_eps = 1e-4, gc_tol = 1e-5;
    auto* cmd_gradcheck =
        app.add_subcommand("gradcheck", "Check analytic gradients against finite differences");
    cmd_gradcheck->add_option("--seed", gc_seed, "Random seed");
    cmd_gradcheck->add_option("--cases", gc_cases, "Number of random instances");
    cmd_gradcheck->add_option("--dim", gc_dim, "Embedding dimension");
    cmd_gradcheck->add_option("--eps", gc_eps, "Finite-difference step");
    cmd_gradcheck->add_option("--tolerance", gc_tol, "Maximum relative error");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (cmd_train->parsed()) {
            if (*seed_flag) train_args.seed = seed_opt;
            if (*lambda_flag) train_args.lambda = lambda_opt;
            if (*gamma_flag) train_args.gamma = gamma_opt;
            if (*epochs_flag) train_args.epochs = epochs_opt;
            return run_train(train_args);
        }
        if (cmd_eval->parsed()) {
            return run_eval(eval_checkpoint, eval_corpus, eval_kb_dir, eval_out, eval_threshold);
        }
        if (cmd_predict->parsed()) {
            return run_predict(pred_checkpoint, pred_kb_dir, pred_input);
        }
        if (cmd_explain->parsed()) {
            return run_explain(exp_checkpoint, exp_kb_dir, exp_text, exp_corpus, exp_clause_id,
                               exp_top_k);
        }
        if (cmd_stats->parsed()) {
            return run_stats(stats_corpus);
        }
        if (cmd_gradcheck->parsed()) {
            return run_gradcheck(gc_seed, gc_cases, gc_dim, gc_eps, gc_tol);
        }
    } catch (const UsageError& e) {
        std::cerr << "[error] " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "[error] " << e.what() << "\n";
        return 2;
    } catch (const TrainingError& e) {
        std::cerr << "[error] " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "[error] " << e.what() << "\n";
        return 1;
    }
    return 1;
}
