#pragma once

#include <stdexcept>
#include <string>

namespace fumot {

/// Base class for every failure raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// beta_f == 0 or beta_f + gamma_x == 0.
class DegenerateConstants : public Error {
public:
    using Error::Error;
};

class SingularSystem : public Error {
public:
    using Error::Error;
};

class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, int iterations, double residual)
        : Error(what), iterations_(iterations), residual_(residual) {}

    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

class PositivityViolation : public Error {
public:
    PositivityViolation(const std::string& what, double min_value)
        : Error(what), min_value_(min_value) {}

    double min_value() const noexcept { return min_value_; }

private:
    double min_value_;
};

class UnsupportedCase : public Error {
public:
    using Error::Error;
};

class DegenerateKappa : public Error {
public:
    using Error::Error;
};

class NearSingular : public Error {
public:
    using Error::Error;
};

class MeshMismatch : public Error {
public:
    using Error::Error;
};

}  // namespace fumot
