#pragma once
#include <stdexcept>
#include <string>

namespace levystab {

// Martingale equation has no root on the admissible tilt interval.
class NoSolutionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An integral required by the operation diverges (tilt outside the
// exponential-moment strip, tail too heavy, degenerate parameter).
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Two models cannot be compared: supports differ, Gaussian parts differ,
// or the Girsanov drift identity fails where it is required exactly.
class EquivalenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The requested law has no exact path/terminal sampler; use the
// characteristic-function pricer instead.
class UnsupportedSimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace levystab
