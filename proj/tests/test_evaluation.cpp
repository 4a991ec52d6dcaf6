#include <doctest.h>

#include "rationmem/evaluation.hpp"
#include "rationmem/trainer.hpp"
#include "properties.hpp"
#include "test_support.hpp"

using namespace rationmem;

TEST_CASE("classify_metrics") {
    SUBCASE("all correct") {
        const EvaluationReport r = classify_metrics({{0.9, 1}, {0.1, 0}, {0.8, 1}});
        CHECK(r.precision == 1.0);
        CHECK(r.recall == 1.0);
        CHECK(r.f1 == 1.0);
        CHECK(r.accuracy == 1.0);
    }
    SUBCASE("tp=1 fp=1 fn=0") {
        const EvaluationReport r = classify_metrics({{0.9, 1}, {0.9, 0}});
        CHECK(r.precision == 0.5);
        CHECK(r.recall == 1.0);
        CHECK(r.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("degenerate: nothing predicted, nothing gold") {
        const EvaluationReport r = classify_metrics({{0.1, 0}, {0.2, 0}});
        CHECK(r.precision == 0.0);
        CHECK(r.recall == 0.0);
        CHECK(r.f1 == 0.0);
        CHECK(r.accuracy == 1.0);
    }
    SUBCASE("tie predicts fair") {
        const EvaluationReport r = classify_metrics({{0.5, 1}});
        CHECK(r.counts.fn == 1);
        CHECK(r.counts.tp == 0);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(classify_metrics({}), std::invalid_argument);
        CHECK_THROWS_AS(classify_metrics({{0.5, 1}}, 1.5), std::invalid_argument);
    }
}

TEST_CASE("memory_selection_correct") {
    Explanation ex;
    ex.ranked_rationales = {{"B", 0.6}, {"A", 0.4}, {"C", 0.1}};

    CHECK(memory_selection_correct(ex, {"A", "B"}, 0.5));   // B alone clears the gate
    CHECK_FALSE(memory_selection_correct(ex, {"A"}, 0.5));  // nothing of the gold selected
    CHECK(memory_selection_correct(ex, {"A", "B", "C"}, 0.5));  // whole KB as gold
    CHECK_FALSE(memory_selection_correct(ex, {"C"}, 0.5));
    // threshold is strict
    CHECK_FALSE(memory_selection_correct(ex, {"B"}, 0.6));
    CHECK_THROWS_AS(memory_selection_correct(ex, {}, 0.5), std::invalid_argument);
}

TEST_CASE("explain") {
    Rng rng(31);
    testsup::TinyInstance inst = testsup::make_tiny_instance(rng, 4, 3);

    SUBCASE("ranked by weight, clipped top-k, selected set consistent") {
        const Explanation ex = explain(inst.clause_text, inst.model, inst.kb, 100);
        CHECK(ex.top_k == inst.kb.entries.size());  // clipped to |KB|
        CHECK(ex.ranked_rationales.size() == inst.kb.entries.size());
        for (std::size_t i = 1; i < ex.ranked_rationales.size(); ++i) {
            CHECK(ex.ranked_rationales[i - 1].second >= ex.ranked_rationales[i].second);
        }
        for (const auto& [id, w] : ex.ranked_rationales) {
            CHECK(ex.selected.count(id) == (w > 0.5 ? 1 : 0));
        }
        CHECK_THROWS_AS(explain(inst.clause_text, inst.model, inst.kb, 0),
                        std::invalid_argument);
    }

    SUBCASE("a forced maximal slot ranks first") {
        // aligning one rationale's tokens with the clause forces its gate up
        KnowledgeBase kb = inst.kb;
        kb.entries[2].text = inst.clause_text + " " + inst.clause_text;
        // boost similarity by scaling up the form
        for (double& x : inst.model.similarity_form().values) x *= 4.0;
        const Explanation ex = explain(inst.clause_text, inst.model, kb, 1);
        const EncodedMemory mem = encode_kb(kb, inst.model);
        const ForwardTrace tr = forward(inst.clause_text, inst.model, mem);
        std::size_t argmax = 0;
        for (std::size_t i = 1; i < tr.weights.size(); ++i) {
            if (tr.weights[i] > tr.weights[argmax]) argmax = i;
        }
        CHECK(ex.ranked_rationales[0].first == mem.slots[argmax].id);
    }

    SUBCASE("rendered report prints rationale texts for the top-k") {
        const Explanation ex = explain(inst.clause_text, inst.model, inst.kb, 2);
        const std::string rendered = format_explanation(ex, inst.kb);
        const RationaleEntry* top = inst.kb.find(ex.ranked_rationales[0].first);
        REQUIRE(top != nullptr);
        CHECK(rendered.find(top->text) != std::string::npos);
        CHECK(rendered.find("probability") != std::string::npos);
    }
}

TEST_CASE("evaluate") {
    const Corpus fixture = load_corpus(testsup::fixture_corpus_path());
    const KnowledgeBase kb = load_kb(testsup::fixture_kb_path(), Category::ter);

    SUBCASE("fresh model predicts everything fair; accuracy is the fair rate") {
        std::vector<std::string> texts;
        for (const Clause& c : fixture.clauses) texts.push_back(c.text);
        for (const auto& e : kb.entries) texts.push_back(e.text);
        MemoryNetModel model(build_vocab(texts, 1), 16, Category::ter, 9);
        for (double& x : model.classifier_weights().values) x = 0.0;
        // negative bias: untrained model answers fair everywhere
        const EvaluationReport r = evaluate(model, fixture, kb);
        CHECK(r.counts.tp == 0);
        CHECK(r.counts.fp == 0);
        CHECK(r.recall == 0.0);
        CHECK(r.accuracy == doctest::Approx(0.5));  // 20 of 40 clauses are fair
        CHECK(r.n == 40);
        // tie probability == 0.5 counts as fair as well
        model.set_classifier_bias(0.0);
        const EvaluationReport tie = evaluate(model, fixture, kb);
        CHECK(tie.counts.tp == 0);
        CHECK(tie.counts.fp == 0);
    }

    SUBCASE("corpus with no gold-annotated unfair clauses has no memory accuracy") {
        Corpus fair_only;
        fair_only.documents.push_back(Document{"d", "d"});
        Clause c;
        c.id = "c";
        c.document_id = "d";
        c.text = "nothing to see";
        fair_only.clauses.push_back(c);
        std::vector<std::string> texts{c.text};
        for (const auto& e : kb.entries) texts.push_back(e.text);
        MemoryNetModel model(build_vocab(texts, 1), 8, Category::ter, 1);
        const EvaluationReport r = evaluate(model, fair_only, kb);
        CHECK_FALSE(r.memory_selection_accuracy.has_value());
    }

    SUBCASE("empty corpus is an error") {
        std::vector<std::string> texts;
        for (const auto& e : kb.entries) texts.push_back(e.text);
        MemoryNetModel model(build_vocab(texts, 1), 8, Category::ter, 1);
        CHECK_THROWS_AS(evaluate(model, Corpus{}, kb), std::invalid_argument);
    }
}

TEST_CASE("evaluation property suite") {
    const auto failure = props::evaluation_properties(250, 66);
    if (failure) FAIL(*failure);
}
