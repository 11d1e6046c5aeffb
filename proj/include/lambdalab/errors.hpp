#pragma once

#include <stdexcept>
#include <string>

namespace lambdalab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Mantissa or exponent left the representable range. Never rounded away.
class OverflowError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Enumeration would produce more points than the configured cap.
class WindowTooLarge : public Error {
public:
    using Error::Error;
};

class NestedThinning : public Error {
public:
    using Error::Error;
};

// A generator-backed witness was evaluated past its produced horizon.
class GeneratorExhausted : public Error {
public:
    using Error::Error;
};

class NotDyadic : public Error {
public:
    using Error::Error;
};

class ZeroGap : public Error {
public:
    using Error::Error;
};

class InsufficientLambda : public Error {
public:
    using Error::Error;
};

class ClaimViolation : public Error {
public:
    using Error::Error;
};

// The refined partition would need more pieces than allowed.
class RefinementFailed : public Error {
public:
    using Error::Error;
};

} // namespace lambdalab
