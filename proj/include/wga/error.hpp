// Exception hierarchy shared by all wga modules

#pragma once

#include <stdexcept>
#include <string>

namespace wga {

// Domain errors. Everything the library throws on bad input or numerical
// failure derives from Error so the CLI can map it to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidSpec : public Error {
public:
    using Error::Error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

class InvalidComparison : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class GeometryError : public Error {
public:
    using Error::Error;
};

class DegenerateInput : public Error {
public:
    using Error::Error;
};

class FitError : public Error {
public:
    using Error::Error;
};

// Eigensolver failures (dense or iterative). Carries the operator size.
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, long size)
        : Error(what + " (operator size " + std::to_string(size) + ")"), size_(size) {}
    long size() const noexcept { return size_; }

private:
    long size_;
};

class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class SeriesDivergence : public Error {
public:
    SeriesDivergence(const std::string& what, double last_term)
        : Error(what), last_term_(last_term) {}
    double last_term() const noexcept { return last_term_; }

private:
    double last_term_;
};

class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double achieved)
        : Error(what), achieved_(achieved) {}
    double achieved_tolerance() const noexcept { return achieved_; }

private:
    double achieved_;
};

// Malformed files (field/profile text format, CSV, config JSON).
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace wga
