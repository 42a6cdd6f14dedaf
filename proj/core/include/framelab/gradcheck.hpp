#pragma once

#include <cstdint>
#include <string>

#include "framelab/policy.hpp"

namespace framelab {

struct GradCheckReport {
    double max_rel_err_sft = 0.0;
    double max_rel_err_rl = 0.0;
    int param_count = 0;
    int seeds = 0;
    double tolerance = 1e-4;
    bool pass = false;
    std::string to_text() const;
};

// Central finite differences over every parameter of a small policy, against
// the analytic gradients of the supervised loss and the clipped group
// objective. rel err = |analytic - fd| / (|analytic| + 1e-8).
GradCheckReport run_gradcheck(uint64_t seed, int n_seeds = 5, double tolerance = 1e-4);

// The reduced architecture used by the check (kept under 10k parameters).
ArchSpec gradcheck_arch();

}  // namespace framelab
