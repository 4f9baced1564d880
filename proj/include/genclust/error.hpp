#pragma once

#include <stdexcept>
#include <string>

namespace genclust {

/// Invalid input or configuration. Raised before any work is done.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A validity index is undefined for the given partition (coincident
/// centers, zero diameter, E_K = 0, ...). The runner excludes such cells.
class DegenerateError : public Error {
public:
    using Error::Error;
};

} // namespace genclust
