#pragma once

#include <stdexcept>
#include <string>

namespace okr {

// Gram quadratic form came out negative beyond roundoff tolerance.
struct PsdError : std::runtime_error {
  explicit PsdError(const std::string& what) : std::runtime_error(what) {}
};

// A grid density failed row-stochasticity / total-mass validation.
struct InvalidCopulaError : std::runtime_error {
  explicit InvalidCopulaError(const std::string& what) : std::runtime_error(what) {}
};

// Envelope fitting got nonpositive values or an empty series.
struct FitError : std::runtime_error {
  explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

// The ridge-target approximation inequality failed; points at a
// discretization bug, not at bad user input.
struct LemmaCheckError : std::runtime_error {
  explicit LemmaCheckError(const std::string& what) : std::runtime_error(what) {}
};

// Aggregate statistics requested from too few samples.
struct StatisticsError : std::runtime_error {
  explicit StatisticsError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace okr
