#pragma once

#include <stdexcept>
#include <string>

namespace mlv {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input text (files, point literals, vector literals).
struct ParseError : Error {
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? "parse error (line " + std::to_string(line) + "): " + what
                     : "parse error: " + what),
          line(line) {}
    std::size_t line;
};

/// An enumeration would visit more points than the configured cap allows.
struct CapExceeded : Error {
    CapExceeded(unsigned long long requested, unsigned long long cap)
        : Error("enumeration of " + std::to_string(requested) +
                " points exceeds cap " + std::to_string(cap)),
          requested(requested), cap(cap) {}
    unsigned long long requested;
    unsigned long long cap;
};

/// Mixed moduli, mismatched signatures, or a map table that does not cover
/// its stated domain.
struct MismatchError : Error {
    using Error::Error;
};

/// Two points of a restricted point set lie in different connected
/// components; carries the canonical representative of each component.
struct NotConnected : Error {
    NotConnected(const std::string& what, std::string rep_a, std::string rep_b)
        : Error(what), component_a(std::move(rep_a)), component_b(std::move(rep_b)) {}
    std::string component_a;
    std::string component_b;
};

/// An exhaustive search ran out of candidates.
struct NotFound : Error {
    using Error::Error;
};

/// A bounded search ran out of budget before reaching a decision.
struct BudgetExhausted : Error {
    using Error::Error;
};

/// A recomputation along an independent route produced a different value.
struct AuditFailed : Error {
    using Error::Error;
};

/// A partial map violates a multilinearity law; carries a witness.
struct MultilinearityViolation : Error {
    MultilinearityViolation(const std::string& what, std::string witness)
        : Error(what + " [witness " + witness + "]"), witness(std::move(witness)) {}
    std::string witness;
};

/// An operation's stated hypotheses do not hold for the given input.
struct PreconditionFailed : Error {
    using Error::Error;
};

}  // namespace mlv
