#pragma once

#include <stdexcept>
#include <string>

namespace sglarma {

enum class ErrorKind {
    Overflow,
    NonFiniteCurvature,
    IndefiniteHessian,
    SingularSystem,
    NoConvergence,
    Separation,
    DegenerateProblem,
    SubsampleTooSmall,
    MissingOracle,
    Config,
    Io,
    Usage,
};

const char* to_string(ErrorKind kind);

/// Base error for every failure raised by the library. The kind drives the
/// CLI exit code mapping.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    /// 2 for usage/config, 3 for numerical failures, 4 for I/O.
    int exit_code() const noexcept;

private:
    ErrorKind kind_;
};

#define SGLARMA_DEFINE_ERROR(Name, Kind)                                       \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
    };

SGLARMA_DEFINE_ERROR(OverflowGuard, Overflow)
SGLARMA_DEFINE_ERROR(NonFiniteCurvature, NonFiniteCurvature)
SGLARMA_DEFINE_ERROR(IndefiniteHessian, IndefiniteHessian)
SGLARMA_DEFINE_ERROR(SingularSystem, SingularSystem)
SGLARMA_DEFINE_ERROR(NoConvergence, NoConvergence)
SGLARMA_DEFINE_ERROR(Separation, Separation)
SGLARMA_DEFINE_ERROR(DegenerateProblem, DegenerateProblem)
SGLARMA_DEFINE_ERROR(SubsampleTooSmall, SubsampleTooSmall)
SGLARMA_DEFINE_ERROR(MissingOracle, MissingOracle)
SGLARMA_DEFINE_ERROR(ConfigError, Config)
SGLARMA_DEFINE_ERROR(IoError, Io)
SGLARMA_DEFINE_ERROR(UsageError, Usage)

#undef SGLARMA_DEFINE_ERROR

}  // namespace sglarma
