// Error types shared across the toolkit. Every failure mode named by the
// public contracts maps to one exception type; batch checks catch these per
// sample and record them instead of aborting.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pnf {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OutOfDomain : public Error {
public:
    using Error::Error;
};

class UndefinedExpression : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what + " (at offset " + std::to_string(position) + ")"), pos(position) {}
    std::size_t pos;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class SingularGauge : public Error {
public:
    using Error::Error;
};

class NotGraph : public Error {
public:
    using Error::Error;
};

class NotSubmersion : public Error {
public:
    using Error::Error;
};

// Thrown by flow integrators when a trajectory leaves the chart; carries the
// escape time and location so callers can shrink the probed neighborhood.
class DomainEscape : public Error {
public:
    DomainEscape(const std::string& what, double t, std::vector<double> where)
        : Error(what), time(t), location(std::move(where)) {}
    double time;
    std::vector<double> location;
};

class NotImmersion : public Error {
public:
    using Error::Error;
};

class NotTransversal : public Error {
public:
    NotTransversal(const std::string& what, std::vector<double> param, double sigma)
        : Error(what), parameter(std::move(param)), smallest_singular_value(sigma) {}
    std::vector<double> parameter;
    double smallest_singular_value;
};

class FrameDegeneracy : public Error {
public:
    using Error::Error;
};

class SpectrumOnCut : public Error {
public:
    using Error::Error;
};

class NotInvertible : public Error {
public:
    using Error::Error;
};

class RankOddity : public Error {
public:
    using Error::Error;
};

class NotVanishingOnX : public Error {
public:
    using Error::Error;
};

class NotPoissonMap : public Error {
public:
    using Error::Error;
};

// NaN/Inf surfaced anywhere aborts the enclosing check with a diagnostic.
class NumericFailure : public Error {
public:
    using Error::Error;
};

} // namespace pnf
