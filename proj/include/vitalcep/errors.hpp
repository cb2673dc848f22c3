#pragma once

#include <stdexcept>
#include <string>

namespace vitalcep {

// Base for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// wire
class MalformedRecord : public Error {
public:
    using Error::Error;
};

// broker
class UnknownTopic : public Error {
public:
    using Error::Error;
};
class ConflictingRetention : public Error {
public:
    using Error::Error;
};
class OffsetAhead : public Error {
public:
    using Error::Error;
};

// dsp / analytics
class DegenerateSignal : public Error {
public:
    using Error::Error;
};
class UnstableDesign : public Error {
public:
    using Error::Error;
};
class InsufficientData : public Error {
public:
    using Error::Error;
};
class InvalidModel : public Error {
public:
    using Error::Error;
};
class DegenerateSpectrum : public Error {
public:
    using Error::Error;
};

// runtime
class ConfigError : public Error {
public:
    using Error::Error;
};
class SourceUnreadable : public Error {
public:
    using Error::Error;
};

}  // namespace vitalcep
