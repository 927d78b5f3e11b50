#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cdcspm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mechanism parameters outside their valid domain.
class ParameterDomainError : public Error {
public:
    using Error::Error;
};

/// A caller broke a documented precondition (wrong joint slot, bad leg index, ...).
class ContractViolation : public Error {
public:
    using Error::Error;
};

class InvalidQuaternionError : public Error {
public:
    explicit InvalidQuaternionError(double norm)
        : Error("quaternion norm " + std::to_string(norm) + " deviates from 1 by more than 1e-6"),
          norm_(norm) {}
    double norm() const noexcept { return norm_; }

private:
    double norm_;
};

/// Raised by quat_to_ypr when pitch is within the singular band around +-90 deg.
class GimbalProximityError : public Error {
public:
    explicit GimbalProximityError(double pitch)
        : Error("orientation is within the ZYX gimbal band (pitch = " + std::to_string(pitch) + " rad)"),
          pitch_(pitch) {}
    double pitch() const noexcept { return pitch_; }

private:
    double pitch_;
};

/// Forward kinematics found no assembly for the given motor angles.
class NoSolutionError : public Error {
public:
    explicit NoSolutionError(double best_residual)
        : Error("forward kinematics did not converge (best residual " + std::to_string(best_residual) + ")"),
          best_residual_(best_residual) {}
    double best_residual() const noexcept { return best_residual_; }

private:
    double best_residual_;
};

/// The orientation cannot be reached: the IK discriminant of `leg` (0-based) is negative.
class UnreachableOrientationError : public Error {
public:
    UnreachableOrientationError(std::size_t leg, double discriminant)
        : Error("orientation unreachable: leg " + std::to_string(leg + 1) + " has negative discriminant " +
                std::to_string(discriminant)),
          leg_(leg), discriminant_(discriminant) {}
    std::size_t leg() const noexcept { return leg_; }
    double discriminant() const noexcept { return discriminant_; }

private:
    std::size_t leg_;
    double discriminant_;
};

/// Passive-joint extraction found a component mismatch, usually a wrong phi1.
class InconsistentChainError : public Error {
public:
    InconsistentChainError(std::size_t leg, double residual)
        : Error("inconsistent chain on leg " + std::to_string(leg + 1) + " (residual " + std::to_string(residual) +
                ")"),
          leg_(leg), residual_(residual) {}
    std::size_t leg() const noexcept { return leg_; }
    double residual() const noexcept { return residual_; }

private:
    std::size_t leg_;
    double residual_;
};

}  // namespace cdcspm
