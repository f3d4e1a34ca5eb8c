#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace uee {

// Base for all library failures. `category()` is a stable machine-readable
// tag; the CLI prints it next to the message and maps it to the exit status.
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& what)
        : std::runtime_error(what), category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

// Vector/length mismatches between values that must share a shape.
struct DimensionError : Error {
    explicit DimensionError(const std::string& w) : Error("dimension", w) {}
};

// A value outside its admissible range (probabilities, monotone costs, ...).
struct DomainError : Error {
    explicit DomainError(const std::string& w) : Error("domain", w) {}
};

// A caller broke a call-sequence or data-availability contract.
struct ContractError : Error {
    explicit ContractError(const std::string& w) : Error("contract", w) {}
};

// Malformed input text (trace files, configs).
struct ParseError : Error {
    explicit ParseError(const std::string& w) : Error("parse", w) {}
};

struct IoError : Error {
    explicit IoError(const std::string& w) : Error("io", w) {}
};

// A finite stream ran out before the requested number of rounds.
struct RunLengthError : Error {
    explicit RunLengthError(const std::string& w) : Error("length", w) {}
};

// Regret bound requested for an instance with a non-unique optimum.
struct DegenerateGapError : Error {
    explicit DegenerateGapError(const std::string& w) : Error("degenerate-gap", w) {}
};

// Invalid experiment configuration; message lists every violation found.
struct ValidationError : Error {
    explicit ValidationError(const std::string& w) : Error("validation", w) {}
};

}  // namespace uee
