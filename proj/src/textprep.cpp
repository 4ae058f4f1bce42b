// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 triage contributors

#include "triage/textprep.hpp"

#include <fstream>

#include "triage/errors.hpp"
#include "triage/util.hpp"

namespace triage {

namespace {

struct Codepoint {
    std::uint32_t value = 0;
    std::size_t length = 1;  // bytes consumed; 1 for invalid sequences
    bool valid = false;
};

Codepoint decode_utf8(std::string_view text, std::size_t pos) {
    Codepoint cp;
    const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(text[i]); };
    const unsigned char b0 = byte(pos);
    if (b0 < 0x80) {
        cp = {b0, 1, true};
    } else if ((b0 & 0xe0) == 0xc0 && pos + 1 < text.size() && (byte(pos + 1) & 0xc0) == 0x80) {
        cp = {static_cast<std::uint32_t>((b0 & 0x1fu) << 6 | (byte(pos + 1) & 0x3fu)), 2, true};
    } else if ((b0 & 0xf0) == 0xe0 && pos + 2 < text.size() && (byte(pos + 1) & 0xc0) == 0x80 &&
               (byte(pos + 2) & 0xc0) == 0x80) {
        cp = {static_cast<std::uint32_t>((b0 & 0x0fu) << 12 | (byte(pos + 1) & 0x3fu) << 6 |
                                         (byte(pos + 2) & 0x3fu)),
              3, true};
    } else if ((b0 & 0xf8) == 0xf0 && pos + 3 < text.size() && (byte(pos + 1) & 0xc0) == 0x80 &&
               (byte(pos + 2) & 0xc0) == 0x80 && (byte(pos + 3) & 0xc0) == 0x80) {
        cp = {static_cast<std::uint32_t>((b0 & 0x07u) << 18 | (byte(pos + 1) & 0x3fu) << 12 |
                                         (byte(pos + 2) & 0x3fu) << 6 | (byte(pos + 3) & 0x3fu)),
              4, true};
    }
    return cp;
}

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xc0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3f));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xe0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
        out += static_cast<char>(0x80 | (cp & 0x3f));
    } else {
        out += static_cast<char>(0xf0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3f));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
        out += static_cast<char>(0x80 | (cp & 0x3f));
    }
}

bool is_token_char(std::uint32_t cp) {
    if (cp < 0x80) {
        return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || cp == '_';
    }
    // Latin-1 punctuation/symbols separate; everything else non-ASCII is
    // treated as a letter. Covers Turkish and the rest of Latin Extended
    // without a full Unicode property table.
    if (cp >= 0xa0 && cp <= 0xbf) return false;
    if (cp == 0xd7 || cp == 0xf7) return false;          // multiplication, division signs
    if (cp >= 0x2000 && cp <= 0x206f) return false;      // general punctuation
    return true;
}

// Compact case folding: ASCII, Latin-1 Supplement, Latin Extended-A, Greek
// and Cyrillic. Codepoints outside these ranges pass through unchanged.
std::uint32_t fold_lower(std::uint32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp >= 0xc0 && cp <= 0xde && cp != 0xd7) return cp + 0x20;
    if (cp == 0x130) return 'i';  // dotted capital I; dropping the combining dot
    if (cp >= 0x100 && cp <= 0x137) return (cp % 2 == 0) ? cp + 1 : cp;
    if (cp >= 0x139 && cp <= 0x148) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp >= 0x14a && cp <= 0x177) return (cp % 2 == 0) ? cp + 1 : cp;
    if (cp == 0x178) return 0xff;
    if (cp >= 0x179 && cp <= 0x17e) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp >= 0x391 && cp <= 0x3a9 && cp != 0x3a2) return cp + 0x20;
    if (cp >= 0x410 && cp <= 0x42f) return cp + 0x20;
    if (cp >= 0x400 && cp <= 0x40f) return cp + 0x50;
    return cp;
}

}  // namespace

std::uint64_t PrepConfig::fingerprint() const {
    std::uint64_t h = fnv1a64("prep-v1");
    h = fnv1a64(std::to_string(ngram_max), h);
    h = fnv1a64(std::to_string(min_token_len), h);
    for (const auto& word : stopwords) {
        h = fnv1a64(word, h);
        h = fnv1a64("\n", h);
    }
    return h;
}

void PrepConfig::validate() const {
    if (ngram_max < 1 || ngram_max > 3) throw InvalidConfig("ngram_max must be in [1, 3]");
    if (min_token_len < 1) throw InvalidConfig("min_token_len must be >= 1");
}

TokenStream tokenize(std::string_view text, const PrepConfig& config) {
    config.validate();
    TokenStream out;
    std::string current;
    int current_len = 0;  // in codepoints

    auto flush = [&] {
        if (current_len >= config.min_token_len && !config.stopwords.contains(current)) {
            out.tokens.push_back(current);
        }
        current.clear();
        current_len = 0;
    };

    std::size_t pos = 0;
    while (pos < text.size()) {
        const Codepoint cp = decode_utf8(text, pos);
        pos += cp.length;
        if (cp.valid && is_token_char(cp.value)) {
            append_utf8(current, fold_lower(cp.value));
            ++current_len;
        } else if (!current.empty()) {
            flush();
        }
    }
    if (!current.empty()) flush();
    return out;
}

std::vector<std::string> ngrams(const TokenStream& stream, int n_max) {
    if (n_max < 1) throw InvalidConfig("n_max must be >= 1");
    const auto& toks = stream.tokens;
    std::vector<std::string> out;
    if (toks.empty()) return out;
    out.reserve(toks.size() * static_cast<std::size_t>(n_max));
    for (std::size_t start = 0; start < toks.size(); ++start) {
        std::string gram = toks[start];
        out.push_back(gram);
        for (int k = 2; k <= n_max && start + static_cast<std::size_t>(k) <= toks.size(); ++k) {
            gram += ' ';
            gram += toks[start + static_cast<std::size_t>(k) - 1];
            out.push_back(gram);
        }
    }
    return out;
}

std::vector<std::string> prepare(std::string_view text, const PrepConfig& config) {
    return ngrams(tokenize(text, config), config.ngram_max);
}

std::set<std::string> load_stopwords(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open stopword list: " + path.string());
    std::set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        words.insert(line);
    }
    return words;
}

}  // namespace triage
