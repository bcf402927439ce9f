#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace bam {

/// Discrete resource units. Always non-negative in valid state; signed so that
/// deficits and shortfalls can be computed without wrap-around.
using Units = std::int64_t;

using ClassIndex = std::size_t;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TopologyError : public Error {
public:
    enum class Kind { DuplicateNode, UnknownEndpoint, SelfLink, NegativeCapacity, UnknownLink };

    TopologyError(Kind kind, const std::string &what) : Error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class UnknownRequest : public Error {
public:
    explicit UnknownRequest(const std::string &id) : Error("unknown request '" + id + "'"), id_(id) {}
    const std::string &id() const { return id_; }

private:
    std::string id_;
};

} // namespace bam
