#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "gsle/classical.hpp"
#include "gsle/evolver.hpp"

namespace gsle {

enum class Mode { gsle, classical, compare, bohmian_post };

/// How the coupling was requested; `gup` builds a tabulated coupling from the potential.
struct CouplingSpec {
    enum class Kind { linear, constant, power, sinusoidal, gup };
    Kind kind = Kind::linear;
    double value = 1.0;
    int exponent = 1;
    double amplitude = 1.0;
    double wavenumber = 1.0;

    bool operator==(const CouplingSpec&) const = default;
};

struct EmitFlags {
    bool observables = true;
    bool snapshots = false;
    bool trajectories = false;
    bool weak_values = false;
    bool noise = false;

    bool operator==(const EmitFlags&) const = default;
};

struct ExperimentSpec {
    Mode mode = Mode::gsle;
    SimConfig sim;
    CouplingSpec coupling;
    /// Particle count, cloud and memory model; the rest is copied from `sim`.
    LangevinConfig classical;
    bool classical_memory = false;
    std::string initial_file;
    std::size_t ensemble_seeds = 1;
    std::string output_dir = "out";
    unsigned workers = 1;
    EmitFlags emit;
    std::size_t n_trajectories = 1000;
    int trajectory_substeps = 4;
    double gup_alpha = 0.0;

    bool operator==(const ExperimentSpec&) const = default;
};

/// Parses the sectioned key = value document, fills defaults and validates. Every failure is an
/// Error with code ConfigError.
ExperimentSpec parse_config(std::string_view text);
ExperimentSpec load_config(const std::string& path);

/// Fully resolved document; parse_config(to_config_text(s)) == s.
std::string to_config_text(const ExperimentSpec& spec);

/// 64-bit FNV-1a of the resolved document, as 16 hex digits. The output directory and the worker
/// count do not change results and are left out.
std::string config_digest(const ExperimentSpec& spec);

std::string_view to_string(Mode mode);

} // namespace gsle
