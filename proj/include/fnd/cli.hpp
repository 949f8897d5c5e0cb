#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fnd/eval/report.hpp"

namespace fnd {

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitRuntime = 2 };

/// Runs one `fnd` invocation. args[0] is the program name. Machine-readable
/// output goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Comparison table over evaluation reports, sorted by mean test accuracy (descending, stable).
std::string render_table(const std::vector<EvalReport>& reports);
/// "n accuracy" lines, ascending n; points with an empty holdout are skipped.
std::string render_curve_data(const CurveReport& curve);
/// Row-normalized 2x2 matrix with (FAKE, TRUE) axes.
std::string render_confusion(const EvalReport& report);

}  // namespace fnd
