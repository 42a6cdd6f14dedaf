#include "framelab/harness.hpp"

#include "framelab/rng.hpp"

namespace framelab {

RolloutOutcome run_task_rollout(const PolicyParams& params, const Task& task,
                                const WorldConfig& world, const RewardWeights& weights,
                                const SampleOptions& opts, std::optional<int> fixed_fps) {
    RolloutOutcome out;
    TokenStream prompt = initial_observation(task, world);
    auto injector = make_injector(task, world, fixed_fps);
    out.rollout = sample_rollout(params, prompt, opts, injector);
    out.reward = score_rollout(out.rollout.stream, task, weights);
    out.format_valid = out.reward.r_format > 0.5;
    return out;
}

EvalSummary evaluate_policy(const PolicyParams& params, const std::vector<Task>& tasks,
                            const WorldConfig& world, const RewardWeights& weights,
                            double temperature, uint64_t seed, std::optional<int> fixed_fps,
                            int max_new_tokens) {
    EvalSummary s;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        SampleOptions opts;
        opts.temperature = temperature;
        opts.max_new_tokens = max_new_tokens;
        opts.seed = hash_combine(hash_combine(seed, "eval"), i);
        auto outcome = run_task_rollout(params, tasks[i], world, weights, opts, fixed_fps);

        EvalRow row;
        row.task_seed = tasks[i].seed;
        row.reward = outcome.reward;
        row.format_valid = outcome.format_valid;
        TokenStream completion;
        completion.tokens.assign(
            outcome.rollout.stream.tokens.begin() +
                static_cast<std::ptrdiff_t>(outcome.rollout.prompt_size),
            outcome.rollout.stream.tokens.end());
        if (!completion.tokens.empty()) completion.tokens.front().space_before = false;
        row.completion = serialize(completion);
        s.rows.push_back(std::move(row));

        s.mean_r_samp += outcome.reward.r_samp;
        s.mean_r_ans += outcome.reward.r_ans;
        s.mean_r_format += outcome.reward.r_format;
        s.format_rate += outcome.format_valid ? 1.0 : 0.0;
    }
    if (!tasks.empty()) {
        double n = static_cast<double>(tasks.size());
        s.mean_r_samp /= n;
        s.mean_r_ans /= n;
        s.mean_r_format /= n;
        s.format_rate /= n;
    }
    s.accuracy = s.mean_r_ans;
    return s;
}

std::vector<Task> make_task_block(uint64_t seed, const char* domain, int count,
                                  const WorldConfig& world) {
    std::vector<Task> tasks;
    tasks.reserve(count);
    uint64_t base = hash_combine(seed, domain);
    for (int i = 0; i < count; ++i) tasks.push_back(generate_task(hash_combine(base, i), world));
    return tasks;
}

}  // namespace framelab
