#ifndef OPACHAIN_ERRORS_HPP
#define OPACHAIN_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace opachain
{
enum class ErrorKind
{
    Domain,
    SingularCorrection,
    UnphysicalInput,
    NoSolution,
    InsufficientRipples,
    Design,
    Instability,
    FitFailure,
    InconsistentEfficiencies,
    Parse,
    Validation,
    Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string &message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string &message);

} // namespace opachain

#endif // OPACHAIN_ERRORS_HPP
