#pragma once

#include <stdexcept>
#include <string>

namespace fedadm {

// Base of everything the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class InvalidActionError : public Error {
public:
    using Error::Error;
};

class TractabilityError : public Error {
public:
    using Error::Error;
};

class IncompletePolicyError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

class LifecycleError : public Error {
public:
    using Error::Error;
};

class GapUndefinedError : public Error {
public:
    using Error::Error;
};

} // namespace fedadm
