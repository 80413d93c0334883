#ifndef LSHMM_CLI_HPP
#define LSHMM_CLI_HPP

namespace lshmm {

// Full command-line surface (gen, impute, compare, bench). Returns the
// process exit code: 0 success/match, 1 comparison mismatch, 2 usage error,
// 3 runtime error.
int run_cli(int argc, const char* const* argv);

}  // namespace lshmm

#endif  // LSHMM_CLI_HPP
