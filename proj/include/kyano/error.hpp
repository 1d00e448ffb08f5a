// Exception types shared by all modules.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kyano {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed text input. offset is a 0-based byte offset into the source.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Evaluation hit a singular input (pole, log of nonpositive, chart singularity).
class DomainError : public Error {
public:
    using Error::Error;
};

class SingularMetricError : public Error {
public:
    using Error::Error;
};

// Structurally invalid arguments: dimension or rank mismatch, bad indices.
class ShapeError : public Error {
public:
    using Error::Error;
};

}  // namespace kyano
