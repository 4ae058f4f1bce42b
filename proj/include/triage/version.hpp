// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 triage contributors

#pragma once

namespace triage {

inline constexpr const char* kVersion = "0.1.0";

// Artifact format versions; logged at startup and embedded in artifacts so
// a bundle can be traced back to the code that wrote it.
inline constexpr int kCorpusFormatVersion = 1;
inline constexpr int kTfIdfFormatVersion = 1;
inline constexpr int kLinearFormatVersion = 1;
inline constexpr int kBundleFormatVersion = 1;

}  // namespace triage
