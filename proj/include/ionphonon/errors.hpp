#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ionphonon {

// Base for every failure that comes from the physics rather than from bad input.
// The CLI maps these to exit code 3 and serializes kind() + what() + details().
class PhysicsError : public std::runtime_error {
public:
    explicit PhysicsError(const std::string& msg) : std::runtime_error(msg) {}
    virtual const char* kind() const noexcept { return "physics"; }
};

class BareInstability : public PhysicsError {
public:
    BareInstability(const std::string& msg, double omega_sq)
        : PhysicsError(msg), omega_sq_(omega_sq) {}
    const char* kind() const noexcept override { return "bare-instability"; }
    double omega_squared() const { return omega_sq_; }

private:
    double omega_sq_;
};

class DynamicalInstability : public PhysicsError {
public:
    DynamicalInstability(const std::string& msg, std::vector<std::complex<double>> eigs)
        : PhysicsError(msg), eigs_(std::move(eigs)) {}
    const char* kind() const noexcept override { return "dynamical-instability"; }
    const std::vector<std::complex<double>>& eigenvalues() const { return eigs_; }

private:
    std::vector<std::complex<double>> eigs_;
};

class DivergenceError : public PhysicsError {
public:
    DivergenceError(const std::string& msg, std::string branch)
        : PhysicsError(msg), branch_(std::move(branch)) {}
    const char* kind() const noexcept override { return "divergence"; }
    const std::string& branch() const { return branch_; }

private:
    std::string branch_;
};

// A truncated sum or iteration could not certify the requested accuracy.
class ToleranceError : public PhysicsError {
public:
    ToleranceError(const std::string& msg, double bound)
        : PhysicsError(msg), bound_(bound) {}
    const char* kind() const noexcept override { return "tolerance"; }
    double bound() const { return bound_; }

private:
    double bound_;
};

class BracketError : public PhysicsError {
public:
    BracketError(const std::string& msg, double lo, double hi)
        : PhysicsError(msg), lo_(lo), hi_(hi) {}
    const char* kind() const noexcept override { return "bracket"; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }

private:
    double lo_, hi_;
};

class SingularGeometry : public PhysicsError {
public:
    using PhysicsError::PhysicsError;
    const char* kind() const noexcept override { return "singular-geometry"; }
};

class NoOrderParameter : public PhysicsError {
public:
    using PhysicsError::PhysicsError;
    const char* kind() const noexcept override { return "no-order-parameter"; }
};

class ConsistencyError : public PhysicsError {
public:
    using PhysicsError::PhysicsError;
    const char* kind() const noexcept override { return "consistency"; }
};

}  // namespace ionphonon
