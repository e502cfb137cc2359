#pragma once

#include <stdexcept>
#include <string>

namespace balpot {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SupportOutsideGrid : public Error {
public:
    using Error::Error;
};

class RadiusTooSmall : public Error {
public:
    using Error::Error;
};

class MassNotNegative : public Error {
public:
    using Error::Error;
};

class NotConverged : public Error {
public:
    NotConverged(const std::string& what, long iterations)
        : Error(what), iterations_(iterations) {}
    long iterations() const { return iterations_; }

private:
    long iterations_;
};

class NegativeDensity : public Error {
public:
    using Error::Error;
};

class EmptySupport : public Error {
public:
    using Error::Error;
};

class WrongCase : public Error {
public:
    using Error::Error;
};

class QInfinite : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace balpot
