#pragma once

namespace dfk {

/// Command-line entry point (gen / fit / project / inpaint / superres /
/// infer / eval / metrics / render). Returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace dfk
