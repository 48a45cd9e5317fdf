#pragma once

#include <stdexcept>
#include <string>

namespace robusthedge {

/// Root of all library exceptions.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Problems with user input (document shape, references, normalization).
class InputError : public Error {
public:
    using Error::Error;
};

class MalformedDocument : public InputError {
public:
    using InputError::InputError;
};

class ProbabilityNotNormalized : public InputError {
public:
    ProbabilityNotNormalized(std::string node, std::size_t generator, const std::string& detail)
        : InputError("generator " + std::to_string(generator) + " at node '" + node + "' " + detail),
          node_(std::move(node)), generator_(generator) {}
    const std::string& node() const { return node_; }
    std::size_t generator() const { return generator_; }

private:
    std::string node_;
    std::size_t generator_;
};

class DanglingChildReference : public InputError {
public:
    using InputError::InputError;
};

class DimensionMismatch : public InputError {
public:
    using InputError::InputError;
};

class MissingKernel : public InputError {
public:
    using InputError::InputError;
};

/// Market properties that make the requested computation meaningless.
class DomainDenial : public Error {
public:
    using Error::Error;
};

class ArbitrageDetected : public DomainDenial {
public:
    using DomainDenial::DomainDenial;
};

class NotSupermartingale : public DomainDenial {
public:
    using DomainDenial::DomainDenial;
};

class LocalArbitrage : public ArbitrageDetected {
public:
    using ArbitrageDetected::ArbitrageDetected;
};

class EmptyPolytope : public DomainDenial {
public:
    using DomainDenial::DomainDenial;
};

class InstanceTooLarge : public Error {
public:
    using Error::Error;
};

/// Float-mode simplex lost track (iteration limit or residual blow-up).
class NumericalBreakdown : public Error {
public:
    using Error::Error;
};

/// Raised when an internal cross-check fails; indicates a bug.
class LagrangeGap : public Error {
public:
    using Error::Error;
};

class InternalError : public Error {
public:
    using Error::Error;
};

}  // namespace robusthedge
