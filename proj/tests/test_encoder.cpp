#include <doctest.h>

#include "rationmem/encoder.hpp"
#include "properties.hpp"

using namespace rationmem;

TEST_CASE("tokenize") {
    CHECK(tokenize("To the fullest extent") ==
          std::vector<std::string>{"to", "the", "fullest", "extent"});
    CHECK(tokenize("Box, its affiliates.") == std::vector<std::string>{"box", "its", "affiliates"});
    CHECK(tokenize("") == std::vector<std::string>{});
    CHECK(tokenize("   \t \n ") == std::vector<std::string>{});
    // inner punctuation is kept, pure punctuation tokens vanish
    CHECK(tokenize("e.g. third-party --- (costs)") ==
          std::vector<std::string>{"e.g", "third-party", "costs"});
}

TEST_CASE("build_vocab") {
    Vocabulary v = build_vocab({"a b", "a"}, 1);
    CHECK(v.size() == 3);
    CHECK(v.index_of("a") == 1);  // frequency 2 beats frequency 1
    CHECK(v.index_of("b") == 2);
    CHECK(v.token_at(0) == Vocabulary::kUnkToken);

    Vocabulary only_unk = build_vocab({"a"}, 2);
    CHECK(only_unk.size() == 1);
    CHECK(only_unk.index_of("a") == Vocabulary::kUnkIndex);

    Vocabulary ties = build_vocab({"x y"}, 1);
    CHECK(ties.index_of("x") == 1);  // lexicographic tie-break
    CHECK(ties.index_of("y") == 2);

    CHECK_THROWS_AS(build_vocab({"a"}, 0), std::invalid_argument);
}

TEST_CASE("encode") {
    Vocabulary v = build_vocab({"a b c"}, 1);
    EmbeddingTable emb;
    emb.matrix = Mat64(v.size(), 2, 0.0);
    // a -> [1,0], b -> [0,1], c -> [3,3]
    emb.matrix.at(v.index_of("a"), 0) = 1.0;
    emb.matrix.at(v.index_of("b"), 1) = 1.0;
    emb.matrix.at(v.index_of("c"), 0) = 3.0;
    emb.matrix.at(v.index_of("c"), 1) = 3.0;

    const Vec64 mean = encode({"a", "b"}, v, emb);
    CHECK(mean == Vec64{0.5, 0.5});

    CHECK(encode({"c"}, v, emb) == Vec64{3.0, 3.0});

    // three tokens [1,0],[0,1],[3,3] average 4/3, 4/3
    const Vec64 three = encode({"a", "b", "c"}, v, emb);
    CHECK(three[0] == doctest::Approx(4.0 / 3.0));
    CHECK(three[1] == doctest::Approx(4.0 / 3.0));

    CHECK(encode({}, v, emb) == Vec64(2, 0.0));

    // out-of-vocabulary maps to the unknown row (zeros here)
    CHECK(encode({"zzz"}, v, emb) == Vec64(2, 0.0));

    EmbeddingTable wrong;
    wrong.matrix = Mat64(2, 2, 0.0);
    CHECK_THROWS_AS(encode({"a"}, v, wrong), std::invalid_argument);
}

TEST_CASE("vocabulary restore validation") {
    CHECK_THROWS_AS(Vocabulary(std::vector<std::string>{}), std::invalid_argument);
    CHECK_THROWS_AS(Vocabulary({"nope", "a"}), std::invalid_argument);
    CHECK_THROWS_AS(Vocabulary({std::string(Vocabulary::kUnkToken), "a", "a"}),
                    std::invalid_argument);
    Vocabulary ok({std::string(Vocabulary::kUnkToken), "b", "a"});
    CHECK(ok.index_of("a") == 2);
}

TEST_CASE("encoder property suite") {
    const auto failure = props::encoder_properties(250, 22);
    if (failure) FAIL(*failure);
}
