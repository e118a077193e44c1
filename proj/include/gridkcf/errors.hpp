#pragma once

#include <stdexcept>
#include <string>

namespace gridkcf {

// Base for everything we throw on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad configuration or scenario input. CLI maps this to exit code 2.
struct ConfigError : Error {
    using Error::Error;
};

// Missing or malformed data files (frames, feature maps, CSV). Exit code 3.
struct DataError : Error {
    using Error::Error;
};

// Caller violated an API precondition (dimension mismatch, empty input, ...).
struct ContractError : Error {
    using Error::Error;
};

} // namespace gridkcf
