#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "framelab/harness.hpp"
#include "framelab/policy.hpp"
#include "framelab/rewards.hpp"
#include "framelab/world.hpp"

namespace framelab {

struct RLConfig {
    int group_size = 8;
    double clip_eps = 0.2;
    double kl_beta = 0.01;
    double norm_eps = 1e-4;
    double learning_rate = 0.01;
    int steps = 600;
    int tasks_per_step = 1;
    double temperature = 1.0;
    int max_new_tokens = 256;
    uint64_t seed = 0;
    std::string variant = "sd";  // "sd" or "vanilla"
    std::optional<int> fixed_fps;
    RewardWeights rewards;

    void validate() const;  // throws std::invalid_argument
};

struct GroupBatch {
    Task task;
    std::vector<RolloutRecord> rollouts;
    std::vector<RewardBreakdown> rewards;
    std::vector<double> a_samp;  // group-normalized sampling advantages
    std::vector<double> a_ans;   // group-normalized answer+format advantages
    std::vector<std::vector<double>> token_adv;
};

// (r - mean) / (population std + norm_eps). Throws for groups smaller than 2.
std::vector<double> group_normalize(const std::vector<double>& rewards, double norm_eps);

// Tokens at or before the retrieval terminator get a_samp + a_ans, the rest
// a_ans; without a terminator every token gets a_ans.
std::vector<double> assign_token_advantages(const RolloutRecord& rollout, double a_samp,
                                            double a_ans);

// All policy tokens are optimized; injected and prompt tokens carry no
// log-probs and never enter the objective.
std::vector<uint8_t> optimization_mask(const RolloutRecord& rollout);

struct ObjectiveResult {
    double objective = 0.0;
    double loss = 0.0;  // -objective
    std::vector<double> grad;  // gradient of the loss
};

// Clipped-ratio surrogate with a per-token KL penalty against the reference
// log-probs, averaged per rollout over its masked tokens and then over the
// group. Rollouts without policy tokens contribute zero.
ObjectiveResult clipped_group_objective(const std::vector<RolloutRecord>& rollouts,
                                        const std::vector<std::vector<double>>& token_adv,
                                        const PolicyParams& params, const RLConfig& cfg);

// Segment-decoupled objective over a scored batch (uses batch.token_adv).
ObjectiveResult sd_grpo_objective(const GroupBatch& batch, const PolicyParams& params,
                                  const RLConfig& cfg);

// Trajectory-level baseline: one normalized scalar reward per rollout,
// identical inner arithmetic to the segment-decoupled path.
ObjectiveResult vanilla_grpo_objective(const std::vector<RolloutRecord>& rollouts,
                                       const std::vector<double>& trajectory_rewards,
                                       const PolicyParams& params, const RLConfig& cfg);

// Samples G rollouts for the task, scores them, and fills both advantage
// channels according to cfg.variant.
GroupBatch build_group_batch(const PolicyParams& params, const PolicyParams& ref,
                             const Task& task, const WorldConfig& world, const RLConfig& cfg,
                             uint64_t step);

struct StepMetrics {
    int step = 0;
    double mean_r_samp = 0.0;
    double mean_r_ans = 0.0;
    double mean_r_format = 0.0;
    double loss = 0.0;
    double grad_norm = 0.0;
};

// One on-policy update: fresh rollouts from the current snapshot, one
// first-order step. Throws on a non-finite loss.
StepMetrics train_step(PolicyParams& policy, const PolicyParams& ref,
                       const std::vector<Task>& tasks, const WorldConfig& world,
                       const RLConfig& cfg, int step);

struct RLResult {
    PolicyParams params;
    std::vector<StepMetrics> metrics;
};

// Full training loop. Tasks come from the dataset when given (cycled
// per-step deterministically), otherwise they are generated on the fly.
RLResult train_rl(const PolicyParams& init, const PolicyParams& ref, const WorldConfig& world,
                  const RLConfig& cfg, const std::vector<Task>* dataset = nullptr);

extern const char* kMetricsHeader;  // step,mean_r_samp,mean_r_ans,mean_r_format,loss,grad_norm
std::string metrics_csv_row(const StepMetrics& m);

}  // namespace framelab
