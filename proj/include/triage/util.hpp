// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 triage contributors

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace triage {

/// FNV-1a 64-bit over raw bytes. Used for content digests, config
/// fingerprints and split fingerprints; not a cryptographic hash.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ull) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string to_hex(std::uint64_t value);

std::string read_file(const std::filesystem::path& path);

/// Writes via a sibling temp file and atomic rename, so a failed run never
/// leaves a partial output behind.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// --- RFC 3339 timestamps, seconds precision, stored as Unix epoch seconds ---

std::optional<std::int64_t> parse_rfc3339(std::string_view text);
std::string format_rfc3339(std::int64_t epoch_seconds);

/// Parses "YYYY-MM-DD" to days since the Unix epoch.
std::optional<std::int64_t> parse_date(std::string_view text);
std::string format_date(std::int64_t days_since_epoch);

std::string base64_encode(std::string_view bytes);
std::optional<std::string> base64_decode(std::string_view text);

/// Wall-clock "now", overridable through SOURCE_DATE_EPOCH for reproducible
/// artifacts.
std::int64_t current_epoch_seconds();

}  // namespace triage
