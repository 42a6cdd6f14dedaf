#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "framelab/policy.hpp"
#include "framelab/rewards.hpp"
#include "framelab/world.hpp"

namespace framelab {

struct RolloutOutcome {
    RolloutRecord rollout;
    RewardBreakdown reward;
    bool format_valid = false;
};

// Prompt construction, sampling with injection, and scoring for one task.
RolloutOutcome run_task_rollout(const PolicyParams& params, const Task& task,
                                const WorldConfig& world, const RewardWeights& weights,
                                const SampleOptions& opts,
                                std::optional<int> fixed_fps = std::nullopt);

struct EvalRow {
    uint64_t task_seed = 0;
    RewardBreakdown reward;
    bool format_valid = false;
    std::string completion;  // serialized policy output (with injections)
};

struct EvalSummary {
    double mean_r_samp = 0.0;
    double mean_r_ans = 0.0;
    double mean_r_format = 0.0;
    double format_rate = 0.0;
    double accuracy = 0.0;  // mean answer reward
    std::vector<EvalRow> rows;
};

EvalSummary evaluate_policy(const PolicyParams& params, const std::vector<Task>& tasks,
                            const WorldConfig& world, const RewardWeights& weights,
                            double temperature, uint64_t seed,
                            std::optional<int> fixed_fps = std::nullopt,
                            int max_new_tokens = 256);

// Held-out task block: seeds are drawn from a separate hash domain.
std::vector<Task> make_task_block(uint64_t seed, const char* domain, int count,
                                  const WorldConfig& world);

}  // namespace framelab
