#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ordirs {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Caller handed us something that violates a precondition.
class InputError : public Error {
public:
    using Error::Error;
};

/// An RLE mask whose runs do not describe a valid grid.
class CorruptMaskError : public Error {
public:
    using Error::Error;
};

/// Frames presented out of frame_index order.
class OrderingError : public Error {
public:
    using Error::Error;
};

/// Malformed textual input. `line` is 1-based, `offset` is a 0-based byte
/// offset within that line (or within the whole input when line == 0).
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line, std::size_t offset)
        : Error(msg + " (line " + std::to_string(line) + ", offset " +
                std::to_string(offset) + ")"),
          line_(line),
          offset_(offset) {}

    std::size_t line() const { return line_; }
    std::size_t offset() const { return offset_; }

private:
    std::size_t line_;
    std::size_t offset_;
};

/// A remote capability could not be reached. Carries how many attempts
/// were made before giving up.
class TransportError : public Error {
public:
    TransportError(const std::string& msg, int attempts)
        : Error(msg + " (after " + std::to_string(attempts) + " attempts)"),
          attempts_(attempts) {}

    int attempts() const { return attempts_; }

private:
    int attempts_ = 0;
};

/// The remote side answered but the payload violates the wire contract.
class ProtocolError : public Error {
public:
    using Error::Error;
};

/// A predicate or operation needs data the frame does not carry
/// (typically depth statistics).
class CapabilityMissingError : public Error {
public:
    using Error::Error;
};

/// One prompt/response exchange with a language model.
struct Transcript {
    std::string schema_id;
    std::string prompt;
    std::string response;
    std::string error;  // validation failure that triggered a retry, if any
};

/// Planning failed after exhausting the retry budget. Carries every
/// prompt/response pair so the failure can be inspected offline.
class PlanError : public Error {
public:
    PlanError(const std::string& msg, std::vector<Transcript> transcripts)
        : Error(msg), transcripts_(std::move(transcripts)) {}

    const std::vector<Transcript>& transcripts() const { return transcripts_; }

private:
    std::vector<Transcript> transcripts_;
};

/// A single requirement could not be evaluated (e.g. unusable LLM judgments).
class RequirementError : public Error {
public:
    using Error::Error;
};

/// Internal cross-reference failure, e.g. a candidate id that is not in the frame.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

/// Cassette replay could not match a request, or a digest disagreed.
class CassetteError : public Error {
public:
    using Error::Error;
};

/// The scripted model has no rule covering a prompt.
class NoRuleError : public Error {
public:
    using Error::Error;
};

/// Analysis DSL rejection, at parse or evaluation time.
class ProgramError : public Error {
public:
    using Error::Error;
};

/// Bad application configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A scenario file that violates its own invariants.
class ScenarioError : public Error {
public:
    using Error::Error;
};

}  // namespace ordirs
