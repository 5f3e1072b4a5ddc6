#pragma once

#include <stdexcept>
#include <string>

namespace sgalab {

// Every failure raised by the library derives from Error so callers (the CLI in
// particular) can map families of failures onto exit codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid user-supplied configuration. `field` names the offending key.
struct ConfigError : Error {
    ConfigError(std::string field, const std::string& what)
        : Error(field + ": " + what)
        , field_(std::move(field))
    {
    }
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct ParseError : Error {
    using Error::Error;
};

// A landscape or fitness vector violates f > 0.
struct InvalidLandscape : Error {
    using Error::Error;
};

struct DomainError : Error {
    using Error::Error;
};

struct PreconditionError : Error {
    using Error::Error;
};

struct NumericalError : Error {
    using Error::Error;
};

// The request exceeds what an exact routine supports (e.g. matrix size).
struct CapabilityError : Error {
    using Error::Error;
};

} // namespace sgalab
