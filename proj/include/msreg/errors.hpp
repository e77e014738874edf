#pragma once

#include <stdexcept>
#include <string>

namespace msreg {

/// Invalid argument or specification supplied by the caller.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// File could not be read/written or its contents are malformed.
/// Messages carry row/column context where applicable.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace msreg
