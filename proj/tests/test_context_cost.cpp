#include <doctest.h>

#include <stdexcept>

#include "framelab/context_cost.hpp"

using namespace framelab;

TEST_CASE("per-frame token cost") {
    CHECK(frame_token_cost({16, 16, 2, 1, 2}) == 67);
    CHECK(frame_token_cost({2, 2, 1, 1, 2}) == 7);   // 4 pads plus overhead
    CHECK(frame_token_cost({1, 1, 1, 1, 2}) == 4);   // toy-world model
    CHECK_THROWS_AS(frame_token_cost({16, 16, 3, 1, 2}), std::invalid_argument);
}

TEST_CASE("trajectory context length") {
    CostModel m{16, 16, 2, 1, 2};
    TrajectoryShape shape;
    shape.initial_frames = 120;
    shape.retrieved_frames = {64};
    shape.text_tokens = 400;
    CHECK(trajectory_context_length(shape, m) == 12728);

    TrajectoryShape text_only;
    text_only.text_tokens = 400;
    CHECK(trajectory_context_length(text_only, m) == 400);
}

TEST_CASE("context length grows with frames, rounds, and text") {
    CostModel m{16, 16, 2, 1, 2};
    TrajectoryShape base;
    base.initial_frames = 10;
    base.retrieved_frames = {8};
    base.text_tokens = 100;
    long b = trajectory_context_length(base, m);

    auto more_frames = base;
    more_frames.initial_frames += 1;
    CHECK(trajectory_context_length(more_frames, m) > b);
    auto more_rounds = base;
    more_rounds.retrieved_frames.push_back(8);
    CHECK(trajectory_context_length(more_rounds, m) > b);
    auto more_text = base;
    more_text.text_tokens += 1;
    CHECK(trajectory_context_length(more_text, m) > b);
}

TEST_CASE("protocol comparison orders by total context") {
    CostModel m{16, 16, 2, 1, 2};
    std::vector<ProtocolDescriptor> protocols = {
        {"four_round", 4, 64, 120, 400},
        {"single", 1, 64, 120, 400},
        {"none", 0, 0, 120, 400},
    };
    auto report = compare_protocols(protocols, m);
    REQUIRE(report.size() == 3);
    CHECK(report[0].name == "none");
    CHECK(report[1].name == "single");
    CHECK(report[2].name == "four_round");
    CHECK(report[2].total_tokens > report[1].total_tokens);
    for (std::size_t i = 1; i < report.size(); ++i)
        CHECK(report[i - 1].total_tokens <= report[i].total_tokens);

    // identical configurations tie
    auto same = compare_protocols({{"a", 1, 64, 120, 400}, {"b", 1, 64, 120, 400}}, m);
    CHECK(same[0].total_tokens == same[1].total_tokens);

    // strictly increasing in rounds at an equal per-call budget
    long prev = -1;
    for (int rounds = 0; rounds <= 4; ++rounds) {
        auto r = compare_protocols({{"p", rounds, 64, 120, 400}}, m);
        CHECK(r[0].total_tokens > prev);
        prev = r[0].total_tokens;
    }
}
