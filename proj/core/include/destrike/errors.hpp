#pragma once

#include <stdexcept>
#include <string>

namespace destrike {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad user input: malformed configs, unknown names, inconsistent arguments.
/// The CLI maps these to exit code 1.
class ValidationError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class InvalidMetaError : public Error {
public:
    using Error::Error;
};

class NoInkError : public Error {
public:
    using Error::Error;
};

class DanglingPairError : public Error {
public:
    DanglingPairError(const std::string& id, const std::string& what)
        : Error(what), id_(id) {}
    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

class IoError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class ChecksumError : public Error {
public:
    using Error::Error;
};

class NetworkError : public Error {
public:
    using Error::Error;
};

}  // namespace destrike
