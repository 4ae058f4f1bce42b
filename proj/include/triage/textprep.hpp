// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 triage contributors

#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace triage {

/// Text normalization settings shared by every channel. ngram_max is capped
/// at 3; the active stopword list is folded into the fingerprint so trained
/// models record exactly which list they were built with.
struct PrepConfig {
    int ngram_max = 1;
    std::set<std::string> stopwords;
    int min_token_len = 1;

    std::uint64_t fingerprint() const;
    void validate() const;
};

struct TokenStream {
    std::vector<std::string> tokens;
};

/// Lowercases, splits on anything that is not a letter, digit or underscore,
/// then drops short tokens and stopwords. Letters outside ASCII are kept
/// (case-folded for the Latin-1/Latin-Extended-A/Greek/Cyrillic ranges) so
/// non-English text passes through without language-specific handling.
TokenStream tokenize(std::string_view text, const PrepConfig& config);

/// All contiguous k-grams for k = 1..n_max, joined with single spaces,
/// ordered by start position then k.
std::vector<std::string> ngrams(const TokenStream& stream, int n_max);

/// tokenize + ngrams in one step; the shape every channel feeds the
/// vectorizer.
std::vector<std::string> prepare(std::string_view text, const PrepConfig& config);

/// One token per line, UTF-8; '#' lines and blank lines ignored.
std::set<std::string> load_stopwords(const std::filesystem::path& path);

}  // namespace triage
