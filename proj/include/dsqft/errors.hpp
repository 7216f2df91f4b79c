#pragma once

#include <stdexcept>
#include <string>

namespace dsqft {

// Input violates a documented precondition (malformed matrix, wrong support, ...).
class ContractError : public std::invalid_argument {
public:
    explicit ContractError(const std::string& what) : std::invalid_argument(what) {}
};

// Input is well formed but the mathematics is undefined there.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

class ExceptionalSetError : public DomainError {
public:
    explicit ExceptionalSetError(const std::string& what)
        : DomainError("exceptional set: " + what) {}
};

class PoleError : public DomainError {
public:
    explicit PoleError(const std::string& what) : DomainError("pole: " + what) {}
};

}  // namespace dsqft
