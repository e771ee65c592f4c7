#pragma once

#include <stdexcept>
#include <string>

namespace hvp {

/// Input outside the mathematical domain of an operation (point outside the disk, bad parameter order, ...).
struct DomainError : std::domain_error {
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Geometric input the construction cannot handle (too few sites, all collinear, duplicates).
struct DegenerateInput : std::invalid_argument {
    explicit DegenerateInput(const std::string& what) : std::invalid_argument(what) {}
};

/// The sampling window does not leave the margin an event needs.
struct MarginError : std::runtime_error {
    explicit MarginError(const std::string& what) : std::runtime_error(what) {}
};

/// Broken internal invariant. Seeing one of these means a bug, not bad input.
struct InternalError : std::logic_error {
    explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace hvp
