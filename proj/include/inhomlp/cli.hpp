#pragma once

#include <iosfwd>

namespace inhomlp {

/// Command-line front end. Returns 0 on success, 1 on invalid input or a
/// failed run, 2 on a usage error.
///
///   generate     write a builtin signal (or an ingested image) as CSV
///   measure      apply a mask rule and optional noise to a truth CSV
///   reconstruct  one ADMM solve for a fixed exponent field and lambda
///   design       sample reconstructions and the patchwise exponent field
///   run          full experiment from a config file
///   report       error metrics of reconstructions against a truth
int execute_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace inhomlp
