#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hsicreg {

enum class ErrorKind {
    Input,       // malformed or mismatched arguments
    Config,      // invalid parameter values
    Data,        // non-finite or unparsable data
    Degenerate,  // sample carries no usable variation
    Singular,    // design matrix not numerically invertible
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class SingularDesignError : public Error {
public:
    SingularDesignError(const std::string& what, std::vector<long> columns, double condition)
        : Error(ErrorKind::Singular, what), columns_(std::move(columns)), condition_(condition) {}

    /// Design columns found to be linearly dependent on earlier ones (may be empty).
    [[nodiscard]] const std::vector<long>& columns() const noexcept { return columns_; }
    [[nodiscard]] double condition() const noexcept { return condition_; }

private:
    std::vector<long> columns_;
    double condition_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace hsicreg
