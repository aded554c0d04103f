#pragma once

#include <stdexcept>
#include <string>

namespace neatnav {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input/output width mismatch or a non-positive dimension.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A genome that violates its structural invariants.
class InvalidGenome : public Error {
public:
    using Error::Error;
};

/// Genome could not be turned into an evaluable network (e.g. a cycle).
class DecodeError : public Error {
public:
    using Error::Error;
};

/// Malformed text input: genome files, config files, action logs.
class FormatError : public Error {
public:
    FormatError(const std::string& what, int line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    int line() const noexcept { return line_; }

    /// Same error with `context` (e.g. a file name) prepended to the message.
    static FormatError with_context(const std::string& context, const FormatError& e) {
        FormatError out(context + ": " + e.what(), 0);
        out.line_ = e.line_;
        return out;
    }

private:
    int line_;
};

/// Scenario generation could not produce a feasible layout.
class GenerationError : public Error {
public:
    using Error::Error;
};

/// A fitness evaluation failed during a run.
class EvaluationError : public Error {
public:
    using Error::Error;
};

}  // namespace neatnav
