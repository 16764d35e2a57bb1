#include "opachain/report.hpp"

#include "opachain/trace_io.hpp"

#include <cstdio>
#include <sstream>

#ifndef OPACHAIN_VERSION
#define OPACHAIN_VERSION "0.0.0"
#endif

namespace opachain
{
std::string_view tool_version() noexcept { return OPACHAIN_VERSION; }

std::string fixed(double value, int decimals)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    std::string s(buf);
    if (s == "-0" || s.rfind("-0.", 0) == 0)
    {
        // Avoid printing negative zero after rounding.
        bool all_zero = s.find_first_not_of("-0.") == std::string::npos;
        if (all_zero)
            s.erase(0, 1);
    }
    return s;
}

RunReport::RunReport(std::string command) : command_(std::move(command)) {}

RunReport &RunReport::input(const std::string &key, const std::string &value)
{
    entries_.emplace_back("input." + key, value);
    return *this;
}

RunReport &RunReport::input(const std::string &key, double value) { return input(key, format_number(value)); }

RunReport &RunReport::output(const std::string &key, const std::string &value)
{
    entries_.emplace_back("output." + key, value);
    return *this;
}

RunReport &RunReport::output(const std::string &key, double value) { return output(key, format_number(value)); }

RunReport &RunReport::output_fixed(const std::string &key, double value, int decimals)
{
    return output(key, fixed(value, decimals));
}

RunReport &RunReport::seed(std::uint64_t seed)
{
    entries_.emplace_back("seed", std::to_string(seed));
    return *this;
}

std::string RunReport::str() const
{
    std::ostringstream os;
    os << "# opachain " << tool_version() << '\n';
    os << "command=" << command_ << '\n';
    for (const auto &[k, v] : entries_)
        os << k << '=' << v << '\n';
    return os.str();
}

} // namespace opachain
