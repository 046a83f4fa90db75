#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gsle/classical.hpp"
#include "gsle/config.hpp"
#include "gsle/evolver.hpp"

namespace gsle {

inline constexpr int kExitOk = 0;
inline constexpr int kExitOther = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitConfig = 3;

/// Mean and standard error across seeds of the wave-equation observables, row by row.
/// var_x is the total spread: the mean of each member's var_x plus the spread of the members' <x>.
struct QuantumEnsemble {
    std::vector<double> times;
    std::vector<double> mean_x, stderr_x, mean_p, stderr_p, var_x, stderr_var_x;
    std::size_t members = 0;
};

/// Runs member k with seed derive_seed(master, k); independent of `workers`.
QuantumEnsemble gsle_ensemble(const SimConfig& config, std::size_t n_seeds, std::uint64_t master,
                              unsigned workers = 1);

struct ComparisonRow {
    double t = 0.0;
    double q_mean_x, q_stderr_x, c_mean_x, c_stderr_x, z_x;
    double q_mean_p, q_stderr_p, c_mean_p, c_stderr_p, z_p;
    double q_var_x, c_var_x, z_var_x;
};

struct Comparison {
    std::vector<ComparisonRow> rows;
    /// Largest |quantum - classical| / combined stderr over rows and over <x>, <p>.
    double score = 0.0;
    /// Fraction of rows with |z_x| < 3.
    double fraction_x_within_3 = 0.0;
};

Comparison compare_ensembles(const QuantumEnsemble& quantum, const ClassicalEnsemble& classical);

/// Seed used for the classical side of a comparison.
std::uint64_t classical_seed(std::uint64_t master);

struct OutputHeader {
    std::uint64_t seed = 0;
    std::string digest;
};

void write_observables_csv(const std::filesystem::path& path, const RunRecord& record, const OutputHeader& header);
void write_snapshot_csv(const std::filesystem::path& path, const Snapshot& snapshot, const OutputHeader& header);
Snapshot read_snapshot_csv(const std::filesystem::path& path, const Grid& grid);
/// Reads x, re, im rows (comment and header lines skipped) into samples on `grid`.
std::vector<Complex> read_wavefunction_csv(const std::filesystem::path& path, const Grid& grid);

/// Runs the experiment and writes its files into spec.output_dir. Errors are caught, written to
/// error.json and mapped to an exit status.
int run_experiment(const ExperimentSpec& spec);

/// Post-processes the snapshots of a finished run directory into trajectories and weak values.
int post_process(const std::filesystem::path& run_dir, std::optional<std::filesystem::path> out = {},
                 std::optional<std::uint64_t> seed = {});

struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::optional<std::string> out;
};

/// Loads a config file, applies overrides, optionally forces the mode, and runs it.
int run_config_file(const std::string& path, const CliOverrides& overrides, std::optional<Mode> force_mode = {});

} // namespace gsle
