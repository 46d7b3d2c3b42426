#ifndef CSD_CLI_HPP_
#define CSD_CLI_HPP_

#include <ostream>

namespace csd {

// Entry point of the csd tool. Subcommands: test, tune, cv, nulltable,
// simulate. Returns 0 on success, 2 on usage errors and 1 when the
// computation fails. Reports go to `out` unless --out names a file.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace csd

#endif  // CSD_CLI_HPP_
