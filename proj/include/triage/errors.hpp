// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 triage contributors

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace triage {

/// Base class for all domain errors raised by the library. CLI maps these to
/// exit code 1; anything else escaping indicates a bug.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class IoFailure : public Error {
public:
    explicit IoFailure(const std::string& what) : Error(what) {}
};

class SchemaViolation : public Error {
public:
    SchemaViolation(std::size_t line, std::string field, const std::string& what)
        : Error("line " + std::to_string(line) + ", field '" + field + "': " + what),
          line(line),
          field(std::move(field)) {}

    std::size_t line;
    std::string field;
};

class DuplicateId : public Error {
public:
    explicit DuplicateId(std::string id) : Error("duplicate report id '" + id + "'"), id(std::move(id)) {}
    std::string id;
};

class EmptySide : public Error {
public:
    explicit EmptySide(const std::string& side) : Error("split produced an empty " + side + " set"), side(side) {}
    std::string side;
};

class InvalidConfig : public Error {
public:
    explicit InvalidConfig(const std::string& what) : Error(what) {}
};

class EmptyCorpus : public Error {
public:
    explicit EmptyCorpus(const std::string& what = "cannot fit on an empty corpus") : Error(what) {}
};

class SingleClass : public Error {
public:
    explicit SingleClass(const std::string& what = "training requires at least two distinct labels")
        : Error(what) {}
};

class DimensionMismatch : public Error {
public:
    DimensionMismatch(std::size_t expected, std::size_t got)
        : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " + std::to_string(got)) {}
};

class LengthMismatch : public Error {
public:
    explicit LengthMismatch(const std::string& what) : Error(what) {}
};

class EmptyInput : public Error {
public:
    explicit EmptyInput(const std::string& what = "input must be non-empty") : Error(what) {}
};

class TooFewSamples : public Error {
public:
    explicit TooFewSamples(const std::string& what = "each sample needs at least two values") : Error(what) {}
};

class SeriesTooShort : public Error {
public:
    explicit SeriesTooShort(const std::string& what = "series needs at least four points") : Error(what) {}
};

class BackendFailure : public Error {
public:
    explicit BackendFailure(const std::string& what) : Error(what) {}
};

class UnreadablePayload : public Error {
public:
    explicit UnreadablePayload(const std::string& what) : Error(what) {}
};

}  // namespace triage
