#pragma once

#include <stdexcept>
#include <string>

namespace spatrisk {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A parameter is outside its documented range of validity.
class ParameterError : public Error {
public:
    explicit ParameterError(const std::string& what) : Error(what) {}
};

/// A computed quantity violates an invariant that holds by proof
/// (e.g. an extremal coefficient outside [1,2] beyond roundoff).
class ConsistencyError : public Error {
public:
    explicit ConsistencyError(const std::string& what) : Error(what) {}
};

/// Adaptive quadrature could not reach the requested tolerance in budget.
class QuadratureError : public Error {
public:
    explicit QuadratureError(const std::string& what) : Error(what) {}
};

/// A quantity defined by an integral over the plane does not exist
/// for the requested model (the integrability condition fails).
class DivergenceError : public Error {
public:
    explicit DivergenceError(const std::string& what) : Error(what) {}
};

/// A lambda grid is too short or too narrow for the requested fit.
class GridError : public Error {
public:
    explicit GridError(const std::string& what) : Error(what) {}
};

/// A simulation exceeded its storm budget in strict mode.
class SimulationError : public Error {
public:
    explicit SimulationError(const std::string& what) : Error(what) {}
};

} // namespace spatrisk
