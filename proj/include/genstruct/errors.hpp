#pragma once

#include <stdexcept>
#include <string>

namespace genstruct {

// Bad caller input: malformed files, violated preconditions, out-of-range
// parameters. CLI maps this to exit code 1.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// A postcondition the library itself is responsible for failed to hold.
// Always a bug, never a caller mistake. CLI maps this to exit code 2.
class InternalError : public std::logic_error {
public:
    explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

// A computation refused to proceed past an explicit resource bound
// (structure too large for an exact search, recursion budget exhausted).
class ResourceError : public std::runtime_error {
public:
    explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace genstruct
