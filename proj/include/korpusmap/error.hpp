#pragma once

#include <stdexcept>
#include <string>

namespace korpusmap {

/// Base class for every failure reported by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input that does not match a documented file or wire format.
class FormatError : public Error {
public:
    using Error::Error;
};

/// A call whose arguments violate the operation's preconditions.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Remote endpoint unreachable or responding with an unexpected payload.
class RemoteError : public Error {
public:
    using Error::Error;
};

}  // namespace korpusmap
