#ifndef SPECLAB_CLI_HH
#define SPECLAB_CLI_HH

// ============================================================
// Command-line runner. Ten subcommands expose the library as CSV
// experiments: roots, simulate, kernel, kernel-norm, i-of-t,
// rate-fit, blowup-probe, pointwise-scan, profile-error, table1.
//
// Every run writes one CSV (to --out, or stdout when no path is
// given): a `#` comment line holding the full effective config as
// one JSON object, then a header row, then data rows in canonical
// order. Identical config gives byte-identical output.
// ============================================================

#include <cstddef>
#include <string>
#include <vector>

#include "speclab/model_params.hpp"

namespace speclab {

/// Shared experiment configuration. Defaults are the unit parameter
/// set on the four-decade window used by the rate table. Values come
/// from (in increasing precedence) these defaults, the --config JSON
/// file, and explicit command-line flags.
struct ExperimentConfig {
    ModelParams params;
    std::vector<int> dims = {1, 2, 3, 4, 5, 6};
    double t_min = 1e2;
    double t_max = 1e6;
    std::size_t points = 12;
    double rel_tol = 1e-7;
    double abs_tol = 1e-12;
    unsigned threads = 1;
    std::string out;            ///< CSV path; empty writes to stdout
    unsigned long long seed = 0;  ///< recorded for reproducibility of sweeps
};

/// Read a config overlay from a flat JSON file. Keys match the field
/// names (b, kappa, gamma, delta, dims, t_min, t_max, points, rel_tol,
/// abs_tol, threads, out, seed); absent keys keep their defaults.
/// @throws std::runtime_error on unreadable files, malformed JSON,
///         unknown keys, or wrongly typed values.
ExperimentConfig load_config(const std::string& path);

/// First violated invariant as a message, or an empty string when the
/// config is valid. Checked: positive parameters where required,
/// 0 < t_min < t_max, points >= 8, nonempty dims with every n >= 1,
/// positive tolerances.
std::string validate_config(const ExperimentConfig& config);

/// The effective config as a single-line JSON object with sorted keys;
/// this exact string follows `# ` at the top of every CSV.
std::string config_json(const ExperimentConfig& config);

/// Run one subcommand. argv follows main() conventions (argv[0] is the
/// program name). Returns the process exit code: 0 on success, 1 when
/// the experiment ran but a requested check failed (a table cell or an
/// --expect mismatch) or a numerical routine rejected the inputs, 2 on
/// usage errors (unknown flags, missing required flags, invalid
/// config). Usage errors never write files.
int run_cli(int argc, const char* const* argv);

}  // namespace speclab

#endif  // SPECLAB_CLI_HH
