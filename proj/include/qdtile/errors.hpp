#pragma once

#include <stdexcept>
#include <string>

namespace qdtile {

// Configuration / input problems. CLI maps these to exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A mathematical assertion the toolkit certifies has failed. CLI maps these
// to exit code 2. These are never downgraded to warnings: a failed identity
// means a broken tiling or an implementation bug, not noise.
class CertificationError : public std::runtime_error {
public:
    explicit CertificationError(const std::string& what) : std::runtime_error(what) {}
};

// Checked integer arithmetic overflowed. Hard failure by design: silent
// wraparound would corrupt every downstream certificate.
class OverflowError : public std::runtime_error {
public:
    explicit OverflowError(const std::string& what) : std::runtime_error(what) {}
};

// Elements of two different groups were mixed in one operation.
class GroupMismatchError : public std::runtime_error {
public:
    explicit GroupMismatchError(const std::string& what) : std::runtime_error(what) {}
};

// An iterative numeric kernel failed to converge within its iteration cap.
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace qdtile
