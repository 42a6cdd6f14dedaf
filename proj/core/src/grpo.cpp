#include "framelab/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "framelab/rng.hpp"

namespace framelab {

const char* kMetricsHeader = "step,mean_r_samp,mean_r_ans,mean_r_format,loss,grad_norm";

void RLConfig::validate() const {
    if (group_size < 2) throw std::invalid_argument("rl: group size must be at least 2");
    if (!(clip_eps > 0.0 && clip_eps < 1.0))
        throw std::invalid_argument("rl: clip_eps must lie in (0,1)");
    if (kl_beta < 0.0) throw std::invalid_argument("rl: kl_beta must be non-negative");
    if (!(norm_eps > 0.0)) throw std::invalid_argument("rl: norm_eps must be positive");
    if (variant != "sd" && variant != "vanilla")
        throw std::invalid_argument("rl: variant must be 'sd' or 'vanilla'");
    if (tasks_per_step < 1) throw std::invalid_argument("rl: tasks_per_step must be >= 1");
}

std::vector<double> group_normalize(const std::vector<double>& rewards, double norm_eps) {
    if (rewards.size() < 2)
        throw std::invalid_argument("group_normalize: need at least two rollouts");
    const double n = static_cast<double>(rewards.size());
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= n;
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    var /= n;  // population statistics
    const double denom = std::sqrt(var) + norm_eps;
    std::vector<double> out(rewards.size());
    for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / denom;
    return out;
}

std::vector<double> assign_token_advantages(const RolloutRecord& rollout, double a_samp,
                                            double a_ans) {
    const std::size_t n = rollout.policy_token_count();
    const std::size_t boundary = rollout.sampling_token_count();
    std::vector<double> adv(n);
    for (std::size_t t = 0; t < n; ++t) adv[t] = t < boundary ? a_samp + a_ans : a_ans;
    return adv;
}

std::vector<uint8_t> optimization_mask(const RolloutRecord& rollout) {
    return std::vector<uint8_t>(rollout.policy_token_count(), 1);
}

ObjectiveResult clipped_group_objective(const std::vector<RolloutRecord>& rollouts,
                                        const std::vector<std::vector<double>>& token_adv,
                                        const PolicyParams& params, const RLConfig& cfg) {
    if (rollouts.size() != token_adv.size())
        throw std::invalid_argument("objective: advantages must align with rollouts");
    ObjectiveResult out;
    out.grad.assign(param_count(params.arch), 0.0);
    const double G = static_cast<double>(rollouts.size());

    for (std::size_t i = 0; i < rollouts.size(); ++i) {
        const RolloutRecord& r = rollouts[i];
        const std::size_t n = r.policy_token_count();
        if (token_adv[i].size() != n)
            throw std::invalid_argument("objective: advantage vector has wrong length");
        if (n == 0) continue;  // empty mask contributes nothing
        if (r.logp_old.size() != n || r.logp_ref.size() != n)
            throw std::invalid_argument("objective: rollout lacks old/ref log-probs");

        std::vector<double> logp_cur = compute_logps(params, r);
        std::vector<double> weights(n, 0.0);
        const double scale = 1.0 / (static_cast<double>(n) * G);

        for (std::size_t t = 0; t < n; ++t) {
            const double adv = token_adv[i][t];
            const double rho = std::exp(logp_cur[t] - r.logp_old[t]);
            const double clipped =
                std::min(std::max(rho, 1.0 - cfg.clip_eps), 1.0 + cfg.clip_eps);
            const double unclipped_term = rho * adv;
            const double clipped_term = clipped * adv;
            double term;
            double grad_coeff;
            if (unclipped_term <= clipped_term) {
                term = unclipped_term;
                grad_coeff = rho * adv;
            } else {
                term = clipped_term;
                grad_coeff = 0.0;  // clipped branch is constant in the parameters
            }
            const double delta = r.logp_ref[t] - logp_cur[t];
            const double kl = std::exp(delta) - delta - 1.0;
            term -= cfg.kl_beta * kl;
            grad_coeff -= cfg.kl_beta * (1.0 - std::exp(delta));

            out.objective += scale * term;
            weights[t] = scale * grad_coeff;
        }
        auto mask = optimization_mask(r);
        WeightedLogprob wl = weighted_logprob_grad(params, r, weights, mask);
        for (std::size_t p = 0; p < out.grad.size(); ++p) out.grad[p] -= wl.grad[p];
    }
    out.loss = -out.objective;
    return out;
}

ObjectiveResult sd_grpo_objective(const GroupBatch& batch, const PolicyParams& params,
                                  const RLConfig& cfg) {
    return clipped_group_objective(batch.rollouts, batch.token_adv, params, cfg);
}

ObjectiveResult vanilla_grpo_objective(const std::vector<RolloutRecord>& rollouts,
                                       const std::vector<double>& trajectory_rewards,
                                       const PolicyParams& params, const RLConfig& cfg) {
    std::vector<double> a = group_normalize(trajectory_rewards, cfg.norm_eps);
    std::vector<std::vector<double>> token_adv(rollouts.size());
    for (std::size_t i = 0; i < rollouts.size(); ++i)
        token_adv[i].assign(rollouts[i].policy_token_count(), a[i]);
    return clipped_group_objective(rollouts, token_adv, params, cfg);
}

GroupBatch build_group_batch(const PolicyParams& params, const PolicyParams& ref,
                             const Task& task, const WorldConfig& world, const RLConfig& cfg,
                             uint64_t step) {
    GroupBatch batch;
    batch.task = task;
    for (int g = 0; g < cfg.group_size; ++g) {
        SampleOptions opts;
        opts.temperature = cfg.temperature;
        opts.max_new_tokens = cfg.max_new_tokens;
        opts.seed = hash_combine(hash_combine(hash_combine(cfg.seed, step), task.seed),
                                 static_cast<uint64_t>(g));
        auto outcome = run_task_rollout(params, task, world, cfg.rewards, opts, cfg.fixed_fps);
        outcome.rollout.logp_ref = compute_logps(ref, outcome.rollout);
        batch.rollouts.push_back(std::move(outcome.rollout));
        batch.rewards.push_back(outcome.reward);
    }

    std::vector<double> samp, ans;
    for (const auto& r : batch.rewards) {
        samp.push_back(r.r_samp);
        ans.push_back(cfg.rewards.ans_weight * r.r_ans + cfg.rewards.format_weight * r.r_format);
    }
    if (cfg.variant == "vanilla") {
        std::vector<double> total(samp.size());
        for (std::size_t i = 0; i < samp.size(); ++i) total[i] = samp[i] + ans[i];
        std::vector<double> a = group_normalize(total, cfg.norm_eps);
        batch.a_samp.assign(samp.size(), 0.0);
        batch.a_ans = a;
        for (std::size_t i = 0; i < batch.rollouts.size(); ++i)
            batch.token_adv.push_back(
                std::vector<double>(batch.rollouts[i].policy_token_count(), a[i]));
    } else {
        batch.a_samp = group_normalize(samp, cfg.norm_eps);
        batch.a_ans = group_normalize(ans, cfg.norm_eps);
        for (std::size_t i = 0; i < batch.rollouts.size(); ++i)
            batch.token_adv.push_back(
                assign_token_advantages(batch.rollouts[i], batch.a_samp[i], batch.a_ans[i]));
    }
    return batch;
}

StepMetrics train_step(PolicyParams& policy, const PolicyParams& ref,
                       const std::vector<Task>& tasks, const WorldConfig& world,
                       const RLConfig& cfg, int step) {
    cfg.validate();
    StepMetrics m;
    m.step = step;
    std::vector<double> grad(policy.values.size(), 0.0);
    double loss = 0.0;
    int rollout_count = 0;

    for (const Task& task : tasks) {
        GroupBatch batch =
            build_group_batch(policy, ref, task, world, cfg, static_cast<uint64_t>(step));
        ObjectiveResult obj = sd_grpo_objective(batch, policy, cfg);
        const double task_scale = 1.0 / static_cast<double>(tasks.size());
        loss += task_scale * obj.loss;
        for (std::size_t p = 0; p < grad.size(); ++p) grad[p] += task_scale * obj.grad[p];
        for (const auto& r : batch.rewards) {
            m.mean_r_samp += r.r_samp;
            m.mean_r_ans += r.r_ans;
            m.mean_r_format += r.r_format;
            ++rollout_count;
        }
    }
    if (rollout_count > 0) {
        m.mean_r_samp /= rollout_count;
        m.mean_r_ans /= rollout_count;
        m.mean_r_format /= rollout_count;
    }
    if (!std::isfinite(loss))
        throw std::runtime_error("train_step: non-finite loss at step " + std::to_string(step));
    double norm2 = 0.0;
    for (double g : grad) norm2 += g * g;
    m.grad_norm = std::sqrt(norm2);
    m.loss = loss;
    for (std::size_t p = 0; p < policy.values.size(); ++p)
        policy.values[p] -= cfg.learning_rate * grad[p];
    return m;
}

RLResult train_rl(const PolicyParams& init, const PolicyParams& ref, const WorldConfig& world,
                  const RLConfig& cfg, const std::vector<Task>* dataset) {
    cfg.validate();
    RLResult res;
    res.params = init;
    for (int step = 0; step < cfg.steps; ++step) {
        std::vector<Task> tasks;
        for (int t = 0; t < cfg.tasks_per_step; ++t) {
            if (dataset != nullptr && !dataset->empty()) {
                std::size_t idx = static_cast<std::size_t>(
                    hash_combine(hash_combine(cfg.seed, "rl-pick"), step * 131 + t) %
                    dataset->size());
                tasks.push_back((*dataset)[idx]);
            } else {
                uint64_t tseed =
                    hash_combine(hash_combine(hash_combine(cfg.seed, "rl-task"), step), t);
                tasks.push_back(generate_task(tseed, world));
            }
        }
        res.metrics.push_back(train_step(res.params, ref, tasks, world, cfg, step));
    }
    return res;
}

std::string metrics_csv_row(const StepMetrics& m) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g", m.step, m.mean_r_samp,
                  m.mean_r_ans, m.mean_r_format, m.loss, m.grad_norm);
    return buf;
}

}  // namespace framelab
