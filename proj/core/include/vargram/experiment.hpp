#pragma once

#include "vargram/model.hpp"
#include "vargram/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace vargram {

// One experiment = one model + one operating point + horizons/budgets.
// Loaded from JSON; unknown keys are rejected so typos fail loudly.
struct ExperimentConfig {
    std::filesystem::path model_spec; // path to a model JSON, relative to the config file
    Vector x0;
    double perturbation_alpha = 0.0;  // compare runs at x0 * (1 + alpha)
    Index horizon = 1000;
    double step_size = 1e-3;
    double eps = 1e-4;                // empirical Gramian perturbation
    std::vector<int> budgets;
    std::uint64_t seed = 0;
    std::filesystem::path outputs = "out";
    double guess_perturbation = 0.1;
    double noise_std = 0.0;
    Index empirical_max_states = 32;  // studies skip the empirical path above this
    bool no_empirical = false;
    double newton_tol = 1e-10;
    int newton_max_iter = 50;

    std::filesystem::path source_path; // set by the loader, used for the manifest digest
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Wall-clock comparison of the two Gramian constructions at the perturbed
// point x0 * (1 + alpha). Writes a one-row timing CSV plus the two
// normalized heatmap CSVs into out_dir. Timing fields are the only
// nondeterministic outputs this library produces.
struct CompareReport {
    double var_seconds = 0.0;
    double empr_seconds = 0.0;
    double rel_distance = 0.0; // ||W - V||_F / ||V||_F
    bool empirical_skipped = false;
    std::vector<std::filesystem::path> files;
};

CompareReport run_gramian_compare(const ExperimentConfig& cfg);

// Full pipeline: simulate, Gramians, spectrum, verdict, per-sensor
// decomposition, greedy selection per budget (brute-force ratio when
// feasible), estimation error table, manifest. Every artifact is listed in
// manifest.json with a content digest; a stage failure is recorded there
// and the remaining stages still run where their inputs exist.
struct StageStatus {
    std::string name;
    std::string status; // "ok", "skipped", or "failed: <reason>"
};

struct StudyReport {
    std::vector<StageStatus> stages;
    std::filesystem::path manifest_path;
    bool ok = true;
};

StudyReport run_full_study(const ExperimentConfig& cfg);

// Selection-only and estimation-only subsets of the pipeline (the CLI's
// `select` and `estimate` subcommands).
StudyReport run_selection(const ExperimentConfig& cfg);
StudyReport run_estimation(const ExperimentConfig& cfg);

// FNV-1a 64-bit digest of a file's bytes, as 16 hex digits. Used for the
// manifest and for byte-identity checks in tests.
std::string file_digest(const std::filesystem::path& path);

} // namespace vargram
