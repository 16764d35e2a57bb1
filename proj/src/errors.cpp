#include "opachain/errors.hpp"

namespace opachain
{
std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind)
    {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::SingularCorrection: return "singular_correction";
    case ErrorKind::UnphysicalInput: return "unphysical_input";
    case ErrorKind::NoSolution: return "no_solution";
    case ErrorKind::InsufficientRipples: return "insufficient_ripples";
    case ErrorKind::Design: return "design";
    case ErrorKind::Instability: return "instability";
    case ErrorKind::FitFailure: return "fit_failure";
    case ErrorKind::InconsistentEfficiencies: return "inconsistent_efficiencies";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Io: return "io";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, const std::string &message)
    : std::runtime_error(message), kind_(kind)
{
}

void fail(ErrorKind kind, const std::string &message)
{
    throw Error(kind, message);
}

} // namespace opachain
