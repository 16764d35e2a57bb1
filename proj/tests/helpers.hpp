#ifndef OPACHAIN_TESTS_HELPERS_HPP
#define OPACHAIN_TESTS_HELPERS_HPP

#include "opachain/errors.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

// Kind of the opachain::Error thrown by f, or nullopt if none.
template <typename F>
std::optional<opachain::ErrorKind> error_kind(F &&f)
{
    try
    {
        f();
    }
    catch (const opachain::Error &e)
    {
        return e.kind();
    }
    return std::nullopt;
}

inline double rel_err(double got, double want)
{
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}

#endif // OPACHAIN_TESTS_HELPERS_HPP
