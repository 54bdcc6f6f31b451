#pragma once

#include <stdexcept>
#include <string>

namespace toxtree {

// Tree invariant violation: cycles, missing roots, inconsistent edges.
struct StructuralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Unknown node id passed to a traversal or metric query.
struct LookupError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input record; carries position when known.
struct ParseError : std::runtime_error {
    ParseError(std::string msg, long line = -1)
        : std::runtime_error(line >= 0 ? "line " + std::to_string(line) + ": " + msg
                                       : std::move(msg)),
          line_number(line) {}
    long line_number;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad arguments to a statistics kernel (length mismatch, zero variance, ...).
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularDesignError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A node reached the metrics pass without a toxicity score.
struct MetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Remote scorer gave up after exhausting retries.
struct ScorerUnavailableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Remote scorer answered but violated the wire contract.
struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParameterError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// rq5 comparison requires both consent classes in the forest.
struct ComparisonError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace toxtree
