#pragma once

#include <stdexcept>
#include <string>

namespace asip {

/// A scenario or plan that cannot be realized (dense placement, blocked goals).
/// The CLI maps this to exit code 2.
struct InfeasibleError : std::runtime_error {
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

/// An internal consistency check failed. The CLI maps this to exit code 3.
struct InvariantError : std::logic_error {
    explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace asip
