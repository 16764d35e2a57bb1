#ifndef OPACHAIN_REPORT_HPP
#define OPACHAIN_REPORT_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace opachain
{
std::string_view tool_version() noexcept;

// key=value run record. Inputs are echoed under `input.`, results under
// `output.`; the echoed inputs are enough to re-run the command.
class RunReport
{
public:
    explicit RunReport(std::string command);

    RunReport &input(const std::string &key, const std::string &value);
    RunReport &input(const std::string &key, double value);
    RunReport &output(const std::string &key, const std::string &value);
    RunReport &output(const std::string &key, double value);
    // Value rounded for display, e.g. dB at one decimal.
    RunReport &output_fixed(const std::string &key, double value, int decimals);
    RunReport &seed(std::uint64_t seed);

    const std::vector<std::pair<std::string, std::string>> &entries() const noexcept { return entries_; }
    std::string str() const;

private:
    std::string command_;
    std::vector<std::pair<std::string, std::string>> entries_;
};

std::string fixed(double value, int decimals);

} // namespace opachain

#endif // OPACHAIN_REPORT_HPP
