#ifndef KFBI_CLI_HPP
#define KFBI_CLI_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kfbi/drivers.hpp"

namespace kfbi::cli {

enum class Problem { HeleShaw, Stefan, StefanFlow };

/// Full run description parsed from a config file or preset.
struct RunConfig {
    Problem problem = Problem::HeleShaw;
    ShapeSpec shape;
    HeleShawConfig hs;     // used when problem == HeleShaw
    StefanConfig stefan;   // used otherwise
    int metrics_every = 1;
    int snapshot_every = 0; // 0: first/last only
    int fields_every = 0;   // 0: off
    std::string out_dir = "out";
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Line-oriented "key = value" file with [section] headers; # starts a
/// comment. Unknown keys are errors.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::string& path);

std::vector<std::string> preset_names();
std::string preset_text(const std::string& name);

struct Overrides {
    std::optional<int> grid_n, markers;
    std::optional<double> tau, t_final;
    std::optional<std::string> out_dir;
};
void apply_overrides(RunConfig& cfg, const Overrides& ov);

/// Executes the run, writing metrics.csv, curve/field snapshots, plot.svg
/// and run.json into cfg.out_dir. Returns a process exit code (0 ok,
/// 3 solver failure).
int run(const RunConfig& cfg);

struct ConvergenceRow {
    double param = 0; // h or tau
    double error = 0;
};
struct ConvergenceReport {
    std::vector<ConvergenceRow> spatial, temporal;
    std::optional<double> spatial_order, temporal_order;
};

/// Area-error ladders: |A(T) - A(0)| with h halving at fixed tau, and tau
/// halving at fixed h. Orders by least-squares slope when >= 2 levels.
ConvergenceReport convergence_suite(const RunConfig& base, int levels, bool spatial,
                                    bool temporal, int temporal_grid_n = 0);

/// Least-squares slope of log(err) against log(param).
std::optional<double> fit_order(const std::vector<ConvergenceRow>& rows);

int main_entry(int argc, char** argv);

} // namespace kfbi::cli

#endif
