#pragma once

#include <stdexcept>
#include <string>

#include "stochgrid/linalg.hpp"

namespace stochgrid {

// Bad input data: dimension mismatches, invariant violations, malformed files.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// SMPS construct we deliberately do not support (BLOCKS, SCENARIOS, ...).
class UnsupportedFeature : public ValidationError {
public:
    explicit UnsupportedFeature(const std::string& what) : ValidationError(what) {}
};

// Full enumeration of independent entries would exceed the scenario cap.
class ScenarioExplosion : public ValidationError {
public:
    explicit ScenarioExplosion(const std::string& what) : ValidationError(what) {}
};

// A second-stage LP was infeasible at a queried point; carries the witness.
class CompleteRecourseViolation : public std::runtime_error {
public:
    CompleteRecourseViolation(int scenario, Vector farkas, const std::string& what)
        : std::runtime_error(what), scenario(scenario), farkas(std::move(farkas)) {}
    int scenario;
    Vector farkas;
};

// LP solver gave up (iteration limit / unrecoverable drift).
class NumericalFailure : public std::runtime_error {
public:
    explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

// Master LP infeasible: accumulated feasibility cuts exclude the whole region.
class MasterInfeasible : public std::runtime_error {
public:
    explicit MasterInfeasible(const std::string& what) : std::runtime_error(what) {}
};

// model_lower_bound_gap called on a solution where a θ floor was active.
class BoundActiveError : public std::logic_error {
public:
    explicit BoundActiveError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace stochgrid
