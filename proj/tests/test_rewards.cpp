#include <doctest.h>

#include <cmath>
#include <random>

#include "framelab/rewards.hpp"
#include "framelab/rng.hpp"

using namespace framelab;

namespace {

Task mc_task() {
    Task t;
    t.duration = 60;
    t.question_kind = QuestionKind::MultipleChoice;
    t.choices = {"k01", "k02", "k03", "k04"};
    t.gt_start = 10;
    t.gt_end = 20;
    t.gt_fps = 4;
    t.gt_answer = "B";
    Event e{"k02", 10, 20, SpeedClass::Moderate, 4};
    t.events.push_back(e);
    t.target_index = 0;
    return t;
}

}  // namespace

TEST_CASE("temporal IoU") {
    CHECK(temporal_iou(10, 20, 10, 20) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(temporal_iou(0, 10, 20, 30) == 0.0);
    CHECK(std::abs(temporal_iou(0, 10, 5, 15) - 1.0 / 3.0) <= 1e-9);
    CHECK(temporal_iou(5, 5, 5, 5) == 0.0);  // empty union
}

TEST_CASE("IoU symmetry") {
    auto rng = make_rng(11);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int i = 0; i < 200; ++i) {
        double a = u(rng), b = a + u(rng) * 0.3, c = u(rng), d = c + u(rng) * 0.3;
        CHECK(temporal_iou(a, b, c, d) == temporal_iou(c, d, a, b));
        double v = temporal_iou(a, b, c, d);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("fps reward decays linearly to zero at f_max") {
    CHECK(fps_reward(4, 4, 6) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(fps_reward(2, 4, 6) - 2.0 / 3.0) <= 1e-9);
    CHECK(std::abs(fps_reward(1, 6, 6) - 1.0 / 6.0) <= 1e-9);
    CHECK(fps_reward(0, 6, 6) == 0.0);
    CHECK(fps_reward(12, 6, 6) == 0.0);

    // piecewise linear: flat second difference away from the kink
    for (double d = 0.5; d + 1.0 < 6.0; d += 0.5) {
        double second = fps_reward(4 + d + 0.5, 4, 6) - 2 * fps_reward(4 + d, 4, 6) +
                        fps_reward(4 + d - 0.5, 4, 6);
        CHECK(std::abs(second) <= 1e-12);
    }
}

TEST_CASE("sampling reward combines the two terms at equal scale") {
    RewardWeights w;
    RetrievalCommand perfect{10, 20, 4};
    CHECK(sampling_reward(perfect, 10, 20, 4, w) == doctest::Approx(1.0).epsilon(1e-12));

    // IoU 1/3 with fps term 2/3 lands exactly in the middle
    RetrievalCommand cmd{0, 10, 2};
    double r = sampling_reward(cmd, 5, 15, 4, {0.5, 0.5, 6.0, 1.0, 1.0});
    CHECK(std::abs(r - 0.5) <= 1e-9);

    CHECK(sampling_reward(std::nullopt, 10, 20, 4, w) == 0.0);
    RetrievalCommand reversed{20, 10, 4};
    CHECK(sampling_reward(reversed, 10, 20, 4, w) == 0.0);
}

TEST_CASE("sampling reward is monotone in each term") {
    RewardWeights w;
    double prev = -1.0;
    for (double s = 0; s <= 10; s += 1) {  // widen overlap, fps fixed
        RetrievalCommand cmd{10.0 - s, 20.0, 4};
        double r = sampling_reward(cmd, 10, 20, 4, w);
        if (prev >= 0.0) CHECK(r <= prev + 1e-12);
        prev = r;
    }
    prev = -1.0;
    for (int f = 1; f <= 4; ++f) {  // approach the target fps, span fixed
        RetrievalCommand cmd{10, 20, f};
        double r = sampling_reward(cmd, 10, 20, 4, w);
        CHECK(r > prev);
        prev = r;
    }
}

TEST_CASE("answer reward") {
    Task t = mc_task();
    ExtractedAnswer b{ExtractedAnswer::Kind::Symbol, "B", 0, 0};
    ExtractedAnswer c{ExtractedAnswer::Kind::Symbol, "C", 0, 0};
    CHECK(answer_reward(b, t) == 1.0);
    CHECK(answer_reward(c, t) == 0.0);
    CHECK(answer_reward(ExtractedAnswer{}, t) == 0.0);

    Task g = mc_task();
    g.question_kind = QuestionKind::Grounding;
    g.gt_start = 30;
    g.gt_end = 72;
    ExtractedAnswer iv{ExtractedAnswer::Kind::Interval, "", 30, 72};
    CHECK(answer_reward(iv, g) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("score_rollout keeps the three signals independent") {
    Task t = mc_task();
    RewardWeights w;

    auto perfect = parse(
        "<think>check <span>10.00 - 20.00</span> <fps>4</fps> ok</think><answer>B</answer>");
    auto r = score_rollout(perfect, t, w);
    CHECK(r.r_samp == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.r_ans == 1.0);
    CHECK(r.r_format == 1.0);
    CHECK(r.iou == doctest::Approx(1.0));
    CHECK(r.fps_term == doctest::Approx(1.0));

    auto missing_fps =
        parse("<think>check <span>10.00 - 20.00</span> ok</think><answer>B</answer>");
    r = score_rollout(missing_fps, t, w);
    CHECK(r.r_format == 0.0);
    CHECK(r.r_samp == 0.0);
    CHECK(r.r_ans == 1.0);

    auto reversed = parse(
        "<think>check <span>20.00 - 10.00</span> <fps>4</fps> ok</think><answer>B</answer>");
    r = score_rollout(reversed, t, w);
    CHECK(r.r_format == 0.0);
    CHECK(r.r_samp == 0.0);
    CHECK(r.iou == 0.0);

    // every component bounded
    for (const auto& s : {perfect, missing_fps, reversed}) {
        auto rb = score_rollout(s, t, w);
        for (double v : {rb.r_samp, rb.r_ans, rb.r_format, rb.iou, rb.fps_term}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}
