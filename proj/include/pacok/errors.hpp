#pragma once

#include <stdexcept>
#include <string>

namespace pacok {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GridMismatch : public Error {
public:
    using Error::Error;
};

/// An inverse transform produced a non-negligible imaginary part.
class SymmetryViolation : public Error {
public:
    using Error::Error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

class DiscTooLarge : public Error {
public:
    using Error::Error;
};

class RatioMismatch : public Error {
public:
    using Error::Error;
};

class DegenerateFit : public Error {
public:
    using Error::Error;
};

// Configuration parsing.
class ConfigError : public Error {
public:
    using Error::Error;
};

class UnknownKey : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class TypeError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class MissingRequired : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// Snapshot files.
class IoError : public Error {
public:
    using Error::Error;
};

class BadMagic : public IoError {
public:
    using IoError::IoError;
};

class TruncatedFile : public IoError {
public:
    using IoError::IoError;
};

}  // namespace pacok
