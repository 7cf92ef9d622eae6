#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tokescale {

// Exit-code contract: InputError -> 2, NumericError -> 3.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public InputError {
public:
    ParseError(std::size_t line, std::string field, const std::string& msg)
        : InputError("line " + std::to_string(line) + ", field '" + field + "': " + msg),
          line_(line),
          field_(std::move(field)) {}

    std::size_t line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

class ValidationError : public InputError {
public:
    ValidationError(std::string field, const std::string& msg)
        : InputError("field '" + field + "': " + msg), field_(std::move(field)) {}

    const std::string& field() const { return field_; }

private:
    std::string field_;
};

class DomainError : public InputError {
public:
    using InputError::InputError;
};

class InsufficientDataError : public InputError {
public:
    using InputError::InputError;
};

class InsufficientVariationError : public InputError {
public:
    using InputError::InputError;
};

class AlignmentError : public InputError {
public:
    using InputError::InputError;
};

class NonConvexFitError : public NumericError {
public:
    explicit NonConvexFitError(const std::string& msg, double curvature)
        : NumericError(msg), curvature_(curvature) {}

    double curvature() const { return curvature_; }

private:
    double curvature_;
};

class SaddleFitError : public NumericError {
public:
    SaddleFitError(const std::string& msg, double eig_lo, double eig_hi)
        : NumericError(msg), eig_lo_(eig_lo), eig_hi_(eig_hi) {}

    double eig_lo() const { return eig_lo_; }
    double eig_hi() const { return eig_hi_; }

private:
    double eig_lo_;
    double eig_hi_;
};

class SingularDesignError : public NumericError {
public:
    using NumericError::NumericError;
};

class NonConvergenceError : public NumericError {
public:
    NonConvergenceError(const std::string& msg, std::vector<double> best_theta, double grad_norm)
        : NumericError(msg), best_theta_(std::move(best_theta)), grad_norm_(grad_norm) {}

    const std::vector<double>& best_theta() const { return best_theta_; }
    double grad_norm() const { return grad_norm_; }

private:
    std::vector<double> best_theta_;
    double grad_norm_;
};

class UncertaintyUnavailableError : public NumericError {
public:
    using NumericError::NumericError;
};

class NoOptimumError : public InputError {
public:
    using InputError::InputError;
};

}  // namespace tokescale
