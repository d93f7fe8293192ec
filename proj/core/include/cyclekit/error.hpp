#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cyclekit {

// Base type for every error raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed dataset line; message carries path and 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& what)
        : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// A relation string appears in an incoming split but not in the vocabulary
// that the graph was built with.
class UnknownRelationError : public Error {
public:
    explicit UnknownRelationError(const std::string& relation)
        : Error("unknown relation: " + relation), relation_(relation) {}

    const std::string& relation() const noexcept { return relation_; }

private:
    std::string relation_;
};

// Negative sampling could not find enough admissible corruptions.
class SamplingError : public Error {
public:
    using Error::Error;
};

// Tensor or chain shapes disagree.
class DimensionError : public Error {
public:
    using Error::Error;
};

// A chain handed to the sequence builder is not a single simple loop.
class MalformedCycleError : public Error {
public:
    using Error::Error;
};

// Metric requested on an input where it has no defined value.
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

// Non-finite values produced during training.
class GradientError : public Error {
public:
    using Error::Error;
};

// File or serialization failure.
class IoError : public Error {
public:
    using Error::Error;
};

// Bad run configuration (flag or config-file value out of range).
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace cyclekit
