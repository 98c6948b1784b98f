#include "sglarma/errors.hpp"

namespace sglarma {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Overflow: return "OverflowGuard";
        case ErrorKind::NonFiniteCurvature: return "NonFiniteCurvature";
        case ErrorKind::IndefiniteHessian: return "IndefiniteHessian";
        case ErrorKind::SingularSystem: return "SingularSystem";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::Separation: return "Separation";
        case ErrorKind::DegenerateProblem: return "DegenerateProblem";
        case ErrorKind::SubsampleTooSmall: return "SubsampleTooSmall";
        case ErrorKind::MissingOracle: return "MissingOracle";
        case ErrorKind::Config: return "ConfigError";
        case ErrorKind::Io: return "IoError";
        case ErrorKind::Usage: return "UsageError";
    }
    return "Error";
}

int Error::exit_code() const noexcept {
    switch (kind_) {
        case ErrorKind::Usage:
        case ErrorKind::Config:
        case ErrorKind::MissingOracle:
            return 2;
        case ErrorKind::Io:
            return 4;
        default:
            return 3;
    }
}

}  // namespace sglarma
