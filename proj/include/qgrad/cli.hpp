#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qgrad::cli {

/// Entry point shared by the binary and the in-process tests. args excludes
/// the program name. Returns the process exit code: 0 on success, 1 for
/// failed asserted invariants (verify-bounds), 2 for configuration errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// The versioned run-row schema emitted by gradient/hessian/sparse-hessian/
/// query-ledger subcommands.
extern const char* kRunSchemaVersion;
extern const char* kRunHeader;

} // namespace qgrad::cli
