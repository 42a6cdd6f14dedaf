#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "framelab/rng.hpp"
#include "framelab/world.hpp"
#include "fixtures.hpp"

using namespace framelab;

namespace {

int band_low(SpeedClass s) {
    return s == SpeedClass::Static ? 1 : s == SpeedClass::Moderate ? 3 : 5;
}

std::size_t count_role(const std::vector<Token>& toks, Role r) {
    std::size_t n = 0;
    for (const auto& t : toks)
        if (t.role == r) ++n;
    return n;
}

Task fixed_task(double duration, double gt_s, double gt_e, SpeedClass speed, int evidence) {
    Task t;
    t.seed = 1;
    t.duration = duration;
    t.question_kind = QuestionKind::MultipleChoice;
    t.choices = {"k00", "k01", "k02", "k03"};
    t.gt_start = gt_s;
    t.gt_end = gt_e;
    t.gt_fps = evidence;
    t.gt_answer = "A";
    t.events.push_back({"k00", gt_s, gt_e, speed, evidence});
    t.target_index = 0;
    return t;
}

}  // namespace

TEST_CASE("task generation is deterministic in the seed") {
    WorldConfig cfg;
    Task a = generate_task(7, cfg);
    Task b = generate_task(7, cfg);
    CHECK(task_to_line(a) == task_to_line(b));
    Task c = generate_task(8, cfg);
    CHECK(task_to_line(a) != task_to_line(c));
}

TEST_CASE("configs that cannot cover the choices are rejected") {
    WorldConfig cfg;
    cfg.alphabet = 3;
    cfg.n_choices = 4;
    CHECK_THROWS_AS(generate_task(1, cfg), std::invalid_argument);
    WorldConfig cfg2;
    cfg2.alphabet = 4;
    cfg2.distractors = 6;
    CHECK_THROWS_AS(generate_task(1, cfg2), std::invalid_argument);
}

TEST_CASE("500 generated tasks satisfy the task invariants") {
    WorldConfig cfg;
    cfg.question_mc_fraction = 0.6;
    for (int i = 0; i < 500; ++i) {
        Task t = generate_task(hash_combine(99, i), cfg);
        CHECK(t.gt_start >= 0.0);
        CHECK(t.gt_start < t.gt_end);
        CHECK(t.gt_end <= t.duration);
        const Event& target = t.target();
        CHECK(t.gt_fps >= band_low(target.speed));
        CHECK(t.gt_fps <= band_low(target.speed) + 1);
        CHECK(t.gt_fps == target.evidence_fps);
        // exactly one event of the target kind, events pairwise disjoint
        int target_kind_count = 0;
        for (const auto& e : t.events)
            if (e.kind == target.kind) ++target_kind_count;
        CHECK(target_kind_count == 1);
        for (std::size_t a = 0; a < t.events.size(); ++a)
            for (std::size_t b = a + 1; b < t.events.size(); ++b) {
                bool disjoint = t.events[a].end <= t.events[b].start ||
                                t.events[b].end <= t.events[a].start;
                CHECK(disjoint);
            }
        if (t.is_mc()) {
            CHECK(static_cast<int>(t.choices.size()) == cfg.n_choices);
            CHECK(std::count(t.choices.begin(), t.choices.end(), target.kind) == 1);
            CHECK_FALSE(t.gt_answer.empty());
        } else {
            CHECK(t.gt_answer ==
                  format_seconds(t.gt_start) + " - " + format_seconds(t.gt_end));
        }
    }
}

TEST_CASE("frame sampling follows the count law") {
    auto times = sample_frame_times(5.0, 9.0, 4.0, 128);
    CHECK(times.size() == 16);
    for (std::size_t i = 0; i < times.size(); ++i) {
        CHECK(times[i] >= 5.0);
        CHECK(times[i] <= 9.0);
        if (i > 0) CHECK(times[i] > times[i - 1]);
    }

    CHECK(sample_frame_times(0.0, 100.0, 6.0, 128).size() == 128);  // 600 subsampled

    auto mid = sample_frame_times(2.00, 2.10, 1.0, 128);
    REQUIRE(mid.size() == 1);
    CHECK(mid[0] == doctest::Approx(2.05).epsilon(1e-9));

    CHECK_THROWS_AS(sample_frame_times(9.0, 5.0, 4.0, 128), std::invalid_argument);
    CHECK_THROWS_AS(sample_frame_times(5.0, 9.0, 4.0, 0), std::invalid_argument);
}

TEST_CASE("budget law over random spans") {
    auto rng = make_rng(5);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    std::uniform_int_distribution<int> fps(1, 6);
    std::uniform_int_distribution<int> budget(1, 64);
    for (int i = 0; i < 300; ++i) {
        double s = u(rng);
        double e = s + 0.05 + u(rng) * 0.5;
        int f = fps(rng);
        int b = budget(rng);
        auto times = sample_frame_times(s, e, f, b);
        long n = static_cast<long>(std::floor((e - s) * f + 1e-9));
        if (n < 1) n = 1;
        CHECK(static_cast<long>(times.size()) == std::min<long>(n, b));
        for (std::size_t k = 0; k < times.size(); ++k) {
            CHECK(times[k] >= s);
            CHECK(times[k] <= e);
            if (k > 0) CHECK(times[k] > times[k - 1]);
        }
    }
}

TEST_CASE("visibility rule in rendered injections") {
    Task t = fixed_task(60, 20, 30, SpeedClass::Moderate, 4);
    std::vector<double> inside = {25.0};

    auto visible = render_injection(t, inside, 4.0);
    REQUIRE(visible.size() == 4);
    CHECK(visible[0].role == Role::Timestamp);
    CHECK(visible[1].role == Role::VisionStart);
    CHECK(visible[2].role == Role::FrameContent);
    CHECK(visible[2].surface == "k00");
    CHECK(visible[3].role == Role::VisionEnd);
    for (const auto& tok : visible) CHECK(tok.origin == Origin::Injected);

    auto hidden = render_injection(t, inside, 3.0);
    CHECK(hidden[2].surface == "blank");

    CHECK(render_injection(t, {}, 4.0).empty());
}

TEST_CASE("initial observation renders the whole timeline") {
    WorldConfig cfg = flt::small_world();
    cfg.initial_budget = 128;
    Task t = fixed_task(60, 20, 30, SpeedClass::Moderate, 4);

    auto obs = initial_observation(t, cfg, 2.0);
    CHECK(count_role(obs.tokens, Role::Timestamp) == 120);
    auto obs_half = initial_observation(t, cfg, 0.5);
    CHECK(count_role(obs_half.tokens, Role::Timestamp) == 30);

    // prompt tokens precede the frame block
    CHECK(obs.tokens.front().origin == Origin::Prompt);
    CHECK(obs.tokens.back().origin == Origin::Injected);

    // a rapid target stays invisible in the initial pass
    Task rapid = fixed_task(60, 20, 30, SpeedClass::Rapid, 6);
    auto obs_rapid = initial_observation(rapid, cfg, 2.0);
    for (const auto& tok : obs_rapid.tokens)
        if (tok.role == Role::FrameContent) CHECK(tok.surface != "k00");
}

TEST_CASE("oracle answers agree with the labels on 500 tasks") {
    WorldConfig cfg;
    cfg.question_mc_fraction = 0.5;
    for (int i = 0; i < 500; ++i) {
        Task t = generate_task(hash_combine(31337, i), cfg);
        CHECK(oracle_answer(t) == t.gt_answer);
    }
}

TEST_CASE("oracle on degenerate cases") {
    Task single = fixed_task(40, 5, 12, SpeedClass::Static, 1);
    CHECK(oracle_answer(single) == "A");
    Task g = fixed_task(40, 5, 12, SpeedClass::Static, 1);
    g.question_kind = QuestionKind::Grounding;
    g.choices.clear();
    g.gt_answer = "5.00 - 12.00";
    CHECK(oracle_answer(g) == "5.00 - 12.00");
}

TEST_CASE("evidence causality") {
    WorldConfig cfg;
    for (int i = 0; i < 200; ++i) {
        Task t = generate_task(hash_combine(777, i), cfg);
        const Event& target = t.target();
        // overlap of at least one second guarantees a frame in the window
        double s = std::max(0.0, t.gt_start - 3.0);
        double e = std::min(t.duration, t.gt_end + 1.0);

        auto at_evidence = make_frame_set(t, sample_frame_times(s, e, target.evidence_fps, 256),
                                          target.evidence_fps);
        bool seen = false;
        for (const auto& c : at_evidence.contents) seen = seen || c == target.kind;
        CHECK(seen);

        if (target.evidence_fps > 1) {
            int below = target.evidence_fps - 1;
            auto starved = make_frame_set(t, sample_frame_times(s, e, below, 256), below);
            for (const auto& c : starved.contents) CHECK(c != target.kind);
        }
    }
}

TEST_CASE("injector validates commands and clamps spans") {
    WorldConfig cfg = flt::small_world();
    Task t = fixed_task(20, 5, 10, SpeedClass::Static, 1);
    auto inject = make_injector(t, cfg);

    CHECK_FALSE(inject({8, 3, 2}).has_value());   // reversed
    CHECK_FALSE(inject({5, 10, 0}).has_value());  // fps below range
    CHECK_FALSE(inject({5, 10, 9}).has_value());  // fps above range
    CHECK_FALSE(inject({25, 30, 2}).has_value()); // outside the timeline

    auto block = inject({-5, 50, 2});  // clamped to [0, 20]
    REQUIRE(block.has_value());
    CHECK(block->size() == 4u * std::min<std::size_t>(40, cfg.retrieval_budget));

    // fixed density override changes visibility, not the command
    Task rapid = fixed_task(20, 5, 10, SpeedClass::Rapid, 6);
    auto fixed2 = make_injector(rapid, cfg, 2);
    auto starved = fixed2({5, 10, 6});
    REQUIRE(starved.has_value());
    for (const auto& tok : *starved)
        if (tok.role == Role::FrameContent) CHECK(tok.surface == "blank");
}

TEST_CASE("task records round-trip through the line format") {
    WorldConfig cfg;
    cfg.question_mc_fraction = 0.5;
    for (int i = 0; i < 50; ++i) {
        Task t = generate_task(hash_combine(4242, i), cfg);
        Task back = task_from_line(task_to_line(t));
        CHECK(task_to_line(back) == task_to_line(t));
    }
}
