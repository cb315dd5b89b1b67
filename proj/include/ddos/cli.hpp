#ifndef DDOS_CLI_HPP
#define DDOS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace ddos {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitAttacks = 2;

/**
 * Entry point of the ddosctl tool. `args` excludes the program name.
 * Subcommands: generate, calibrate, detect, report, evaluate.
 *
 * Returns 0 on success, 2 when `detect` confirmed at least one attack and
 * 1 on any error (including usage errors).
 */
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ddos

#endif // DDOS_CLI_HPP
