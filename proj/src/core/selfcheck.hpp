#pragma once

#include <iosfwd>

namespace ucs {

// Independent-path verification suites, also wired to the CLI `oracle`
// subcommand:
//   - incremental entropy deltas/commits vs from-scratch recounts,
//   - the level solver vs a least-squares solve on the explicit
//     indicator design matrix, and the fast residual vs the direct product,
//   - the energy-span bound vs exhaustive enumeration on tiny instances,
//   - Boltzmann/schedule identities,
//   - tiny-instance annealing vs the enumerated energy minimum.
// Prints one line per suite; returns true when all pass.
bool run_oracle_suites(std::ostream& out);

}  // namespace ucs
