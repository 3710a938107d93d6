#pragma once

namespace colorwai::cli {

/// Entry point of the colorwai command line. Returns 0 on success, 2 on
/// usage or validation errors and 1 on internal errors.
int run_cli(int argc, char** argv);

}  // namespace colorwai::cli
