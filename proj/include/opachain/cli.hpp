#ifndef OPACHAIN_CLI_HPP
#define OPACHAIN_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace opachain
{
// Exit codes: 0 success, 1 domain/validation error, 2 I/O error.
// Errors are reported on `err` as one line:
//   error kind=<kind> message="<text>"
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace opachain

#endif // OPACHAIN_CLI_HPP
