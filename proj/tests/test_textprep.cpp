// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 triage contributors

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <triage/errors.hpp>
#include <triage/rng.hpp>
#include <triage/textprep.hpp>

using namespace triage;

TEST_CASE("tokenize basics") {
    PrepConfig cfg;

    SUBCASE("empty text") { CHECK(tokenize("", cfg).tokens.empty()); }

    SUBCASE("special characters separate, case folds") {
        const auto stream = tokenize("HTTP 404 - Web page!!", cfg);
        CHECK(stream.tokens == std::vector<std::string>{"http", "404", "web", "page"});
    }

    SUBCASE("stopwords dropped") {
        cfg.stopwords = {"the"};
        const auto stream = tokenize("the error, the error", cfg);
        CHECK(stream.tokens == std::vector<std::string>{"error", "error"});
    }

    SUBCASE("min token length in codepoints") {
        cfg.min_token_len = 3;
        const auto stream = tokenize("an error is up", cfg);
        CHECK(stream.tokens == std::vector<std::string>{"error"});
    }

    SUBCASE("underscores are token-internal") {
        CHECK(tokenize("err_code=12", cfg).tokens == std::vector<std::string>{"err_code", "12"});
    }

    SUBCASE("non-ASCII letters survive with case folding") {
        // Locale-independent folding: ASCII I -> i, İ -> i; ğ/ı pass through.
        const auto stream = tokenize("AĞ BAĞLANTISI KESİLDİ!", cfg);
        REQUIRE(stream.tokens.size() == 3);
        CHECK(stream.tokens[0] == "ağ");
        CHECK(stream.tokens[1] == "bağlantisi");
        CHECK(stream.tokens[2] == "kesildi");
        // and the already-lowercase Turkish form is stable
        CHECK(tokenize("bağlantısı", cfg).tokens == std::vector<std::string>{"bağlantısı"});
    }

    SUBCASE("ngram_max bound enforced") {
        cfg.ngram_max = 4;
        CHECK_THROWS_AS(tokenize("x", cfg), InvalidConfig);
    }
}

TEST_CASE("ngrams definition") {
    SUBCASE("empty stream") {
        CHECK(ngrams(TokenStream{}, 1).empty());
        CHECK(ngrams(TokenStream{}, 3).empty());
    }

    SUBCASE("bigrams ordered by start then k") {
        const TokenStream s{{"a", "b", "c"}};
        CHECK(ngrams(s, 2) == std::vector<std::string>{"a", "a b", "b", "b c", "c"});
    }

    SUBCASE("trigram count") {
        const TokenStream s{{"a", "b", "c"}};
        const auto grams = ngrams(s, 3);
        CHECK(grams.size() == 6);  // 3 + 2 + 1
        CHECK(std::find(grams.begin(), grams.end(), "a b c") != grams.end());
    }
}

namespace {

std::string join(const std::vector<std::string>& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out += ' ';
        out += t;
    }
    return out;
}

std::string random_text(Rng& rng) {
    static const std::string alphabet = "abcXYZ0123 ,.!-_çğüö  ";
    std::string text;
    const auto len = rng.below(120);
    for (std::uint64_t i = 0; i < len; ++i) text += alphabet[rng.below(alphabet.size())];
    return text;
}

}  // namespace

TEST_CASE("tokenize is idempotent on its own output") {
    PrepConfig cfg;
    Rng rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        const auto once = tokenize(random_text(rng), cfg);
        const auto twice = tokenize(join(once.tokens), cfg);
        CHECK(once.tokens == twice.tokens);
    }
}

TEST_CASE("ngram count identity") {
    PrepConfig cfg;
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const auto stream = tokenize(random_text(rng), cfg);
        const int n_max = 1 + static_cast<int>(rng.below(3));
        const auto grams = ngrams(stream, n_max);
        std::size_t expected = 0;
        for (int k = 1; k <= n_max; ++k) {
            if (stream.tokens.size() + 1 > static_cast<std::size_t>(k))
                expected += stream.tokens.size() - static_cast<std::size_t>(k) + 1;
        }
        CHECK(grams.size() == expected);
    }
}

TEST_CASE("stopwords never leak into output") {
    Rng rng(99);
    static const std::vector<std::string> pool = {"the", "a",  "of",   "err", "x1",
                                                  "ağ",  "up", "code", "an",  "is"};
    for (int trial = 0; trial < 200; ++trial) {
        PrepConfig cfg;
        for (const auto& word : pool)
            if (rng.bernoulli(0.4)) cfg.stopwords.insert(word);

        std::string text;
        for (int i = 0; i < 30; ++i) {
            text += pool[rng.below(pool.size())];
            text += rng.bernoulli(0.3) ? "," : " ";
        }
        for (const auto& token : tokenize(text, cfg).tokens) {
            CHECK(!cfg.stopwords.contains(token));
        }
    }
}
