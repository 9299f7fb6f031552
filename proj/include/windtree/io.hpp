#pragma once

namespace windtree {

/// Command-line driver shared by the windtree binary and the in-process
/// tests.  Returns the process exit code: 0 on success, 2 on a malformed
/// command line or rejected configuration, 3 when an estimator had too few
/// events for the requested quantity.
int run_cli(int argc, const char* const* argv);

} // namespace windtree
