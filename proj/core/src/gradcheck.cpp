#include "framelab/gradcheck.hpp"

#include <cmath>
#include <cstdio>

#include "framelab/curator.hpp"
#include "framelab/grpo.hpp"
#include "framelab/rng.hpp"
#include "framelab/sft.hpp"
#include "framelab/world.hpp"

namespace framelab {

namespace {

WorldConfig gradcheck_world() {
    WorldConfig w;
    w.duration_min = 10;
    w.duration_max = 20;
    w.alphabet = 6;
    w.distractors = 1;
    w.initial_budget = 8;
    w.retrieval_budget = 8;
    w.max_seconds = 20;
    return w;
}

RLConfig gradcheck_rl() {
    RLConfig cfg;
    cfg.group_size = 4;
    cfg.max_new_tokens = 48;
    return cfg;
}

template <typename LossFn>
double max_rel_err(PolicyParams params, const std::vector<double>& analytic, LossFn&& loss) {
    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t i = 0; i < params.values.size(); ++i) {
        const double saved = params.values[i];
        params.values[i] = saved + h;
        const double up = loss(params);
        params.values[i] = saved - h;
        const double down = loss(params);
        params.values[i] = saved;
        const double fd = (up - down) / (2.0 * h);
        const double err = std::abs(analytic[i] - fd) / (std::abs(analytic[i]) + 1e-8);
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace

ArchSpec gradcheck_arch() {
    ArchSpec arch;
    arch.vocab.max_seconds = 20;
    arch.vocab.alphabet = 6;
    arch.hidden = 8;
    arch.max_context = 1024;
    return arch;
}

GradCheckReport run_gradcheck(uint64_t seed, int n_seeds, double tolerance) {
    GradCheckReport rep;
    rep.seeds = n_seeds;
    rep.tolerance = tolerance;

    const WorldConfig world = gradcheck_world();
    const ArchSpec arch = gradcheck_arch();
    rep.param_count = static_cast<int>(param_count(arch));

    for (int s = 0; s < n_seeds; ++s) {
        uint64_t base = hash_combine(hash_combine(seed, "gradcheck"), s);
        PolicyParams params = init_params(arch, hash_combine(base, "params"), 0.1);
        PolicyParams ref = init_params(arch, hash_combine(base, "ref"), 0.1);
        Task task = generate_task(hash_combine(base, "world"), world);

        // Supervised loss on one teacher example.
        OracleTeacher teacher(hash_combine(base, "teacher"), world);
        RawRecord rec{task, teacher.annotate(task, SourceKind::VideoQA), SourceKind::VideoQA};
        SftExample example = record_to_example(rec, world);
        SftLoss sl = sft_loss(params, example, false);
        rep.max_rel_err_sft = std::max(
            rep.max_rel_err_sft,
            max_rel_err(params, sl.grad, [&](const PolicyParams& p) {
                return sft_loss_value(p, example, false);
            }));

        // Clipped group objective on a scored batch. Behaviour log-probs are
        // offset so both the interior and the clipped branch are exercised.
        RLConfig cfg = gradcheck_rl();
        cfg.seed = hash_combine(base, "rl");
        GroupBatch batch = build_group_batch(params, ref, task, world, cfg, 0);
        for (std::size_t i = 0; i < batch.rollouts.size(); ++i) {
            auto& r = batch.rollouts[i];
            for (std::size_t t = 0; t < r.logp_old.size(); ++t) {
                double offset = (t % 5 == 0) ? 0.5 : ((t % 3 == 0) ? -0.1 : 0.1);
                r.logp_old[t] = r.logp_current[t] + offset;
            }
        }
        ObjectiveResult obj = sd_grpo_objective(batch, params, cfg);
        rep.max_rel_err_rl = std::max(
            rep.max_rel_err_rl,
            max_rel_err(params, obj.grad, [&](const PolicyParams& p) {
                return sd_grpo_objective(batch, p, cfg).loss;
            }));
    }
    rep.pass = rep.max_rel_err_sft <= tolerance && rep.max_rel_err_rl <= tolerance;
    return rep;
}

std::string GradCheckReport::to_text() const {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "gradcheck: params=%d seeds=%d tol=%.3g\n"
                  "  sft max rel err: %.6g\n"
                  "  rl  max rel err: %.6g\n"
                  "  result: %s\n",
                  param_count, seeds, tolerance, max_rel_err_sft, max_rel_err_rl,
                  pass ? "PASS" : "FAIL");
    return buf;
}

}  // namespace framelab
