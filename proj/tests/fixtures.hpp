#pragma once

// Shared test fixtures: a reduced world and a policy given a short supervised
// warm-up, cached per binary run.

#include <vector>

#include "framelab/curator.hpp"
#include "framelab/policy.hpp"
#include "framelab/rng.hpp"
#include "framelab/sft.hpp"
#include "framelab/world.hpp"

namespace flt {

inline framelab::WorldConfig small_world() {
    framelab::WorldConfig w;
    w.duration_min = 12;
    w.duration_max = 24;
    w.alphabet = 6;
    w.distractors = 1;
    w.initial_budget = 10;
    w.retrieval_budget = 12;
    w.max_seconds = 24;
    return w;
}

inline framelab::ArchSpec small_arch() {
    framelab::ArchSpec arch;
    arch.vocab.max_seconds = 24;
    arch.vocab.alphabet = 6;
    arch.hidden = 16;
    arch.max_context = 1024;
    return arch;
}

inline std::vector<framelab::SftExample> small_dataset(int count, uint64_t seed,
                                                       double mc_fraction = 0.7) {
    using namespace framelab;
    WorldConfig w = small_world();
    w.question_mc_fraction = mc_fraction;
    OracleTeacher teacher(seed, w);
    std::vector<SftExample> out;
    for (int i = 0; i < count; ++i) {
        Task task = generate_task(hash_combine(hash_combine(seed, "fixture"), i), w);
        RawRecord rec{task, teacher.annotate(task, SourceKind::VideoQA), SourceKind::VideoQA};
        out.push_back(record_to_example(rec, w));
    }
    return out;
}

// Policy that has seen enough supervision to emit mostly well-formed
// trajectories; built once per test binary.
inline const framelab::PolicyParams& warmed_policy() {
    using namespace framelab;
    static PolicyParams params = [] {
        auto dataset = small_dataset(160, 42);
        SftConfig cfg;
        cfg.learning_rate = 0.8;
        cfg.steps = 260;
        cfg.batch_size = 32;
        cfg.seed = 7;
        return run_sft(init_params(small_arch(), 7), dataset, cfg).params;
    }();
    return params;
}

}  // namespace flt
