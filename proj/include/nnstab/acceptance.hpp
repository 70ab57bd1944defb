#pragma once

// The validity battery: exact oracles, bound-validity checks and finite-d
// trend checks, each with its own tolerance and time budget.

#include <functional>
#include <string>
#include <vector>

#include "nnstab/montecarlo.hpp"

namespace nnstab {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
    double time_limit = 0.0;  // seconds; 0 means no limit
    /// Bit patterns of every aggregate the criterion produced, for replay.
    std::string fingerprint;
};

struct AcceptanceOptions {
    Execution exec = Execution::parallel(1);
    /// Worker count compared against `exec` by the determinism criterion.
    int replay_workers = 8;
    std::vector<int> only;  // empty: all criteria
    std::function<void(const CriterionResult&)> on_result;
};

inline constexpr int kCriterionCount = 9;

/// Runs criteria 1-7 and 9 directly. Criterion 8 re-runs 1-4 at
/// replay_workers and compares fingerprints with the first pass.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {});

/// One criterion on its own; criterion 8 is not available this way.
CriterionResult run_criterion(int id, const Execution& exec);

}  // namespace nnstab
