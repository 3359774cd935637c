#pragma once

#include <stdexcept>
#include <string>

namespace subalign {

// Base of everything the library throws. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input text (SRT, tagged text, matrix files, vocab, JSON lines).
class ParseError : public Error {
public:
    using Error::Error;
};

// Well-formed input violating a documented invariant or precondition.
class ValidationError : public Error {
public:
    using Error::Error;
};

// No alignment exists for the given sizes (too few frames for the blocks/labels).
class InfeasibleError : public Error {
public:
    using Error::Error;
};

// Embedding provider failure (missing key, transport, protocol).
class ProviderError : public Error {
public:
    using Error::Error;
};

} // namespace subalign
