#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "framelab/rng.hpp"
#include "framelab/tokens.hpp"

using namespace framelab;

namespace {

const std::string kCanonical =
    "<think>check window <span>5.00 - 9.00</span> <fps>4</fps> observe k03</think>"
    "<answer>B</answer>";

bool has_violation(const FormatVerdict& v, Violation x) {
    for (auto e : v.violations)
        if (e == x) return true;
    return false;
}

std::size_t count_role(const TokenStream& s, Role r) {
    std::size_t n = 0;
    for (const auto& t : s.tokens)
        if (t.role == r) ++n;
    return n;
}

}  // namespace

TEST_CASE("parse recognizes the canonical trajectory and sets the boundary") {
    auto s = parse("<think><span>5.00 - 9.00</span> <fps>4</fps> look</think><answer>B</answer>");
    REQUIRE(s.t_fps.has_value());
    CHECK(s.tokens[*s.t_fps].role == Role::FpsClose);
    CHECK(s.tokens[*s.t_fps].surface == "</fps>");
    CHECK(s.tokens[0].role == Role::ThinkOpen);
    CHECK(s.tokens[1].role == Role::SpanOpen);
    CHECK(s.tokens[2].role == Role::Numeral);
    CHECK(s.tokens[2].surface == "5.00");
    CHECK(s.tokens[3].surface == "-");
    CHECK(s.tokens[4].role == Role::Numeral);
    CHECK(s.tokens[5].role == Role::SpanClose);
    CHECK(count_role(s, Role::AnswerOpen) == 1);
    CHECK(count_role(s, Role::AnswerClose) == 1);
}

TEST_CASE("parse of the empty string yields an empty stream") {
    auto s = parse("");
    CHECK(s.tokens.empty());
    CHECK_FALSE(s.t_fps.has_value());
    CHECK(serialize(s) == "");
}

TEST_CASE("unclosed tag regions degrade to text") {
    auto s = parse("hello <span>1.00");
    REQUIRE(s.tokens.size() == 3);
    for (const auto& t : s.tokens) CHECK(t.role == Role::Text);
    CHECK_FALSE(s.t_fps.has_value());
}

TEST_CASE("retrieval command comes from the first complete span/fps pair") {
    auto cmd = parse_retrieval_command(parse("<span>29.50 - 74.00</span> <fps>3</fps>"));
    REQUIRE(cmd.has_value());
    CHECK(cmd->t_s == doctest::Approx(29.50).epsilon(1e-12));
    CHECK(cmd->t_e == doctest::Approx(74.00).epsilon(1e-12));
    CHECK(cmd->f == 3);

    CHECK_FALSE(parse_retrieval_command(parse("<span>1.00 - 2.00</span> no fps here"))
                    .has_value());

    auto reversed = parse("<span>9.00 - 5.00</span><fps>2</fps>");
    auto rcmd = parse_retrieval_command(reversed);
    REQUIRE(rcmd.has_value());
    CHECK(rcmd->t_s == doctest::Approx(9.0));
    CHECK(rcmd->t_e == doctest::Approx(5.0));
    CHECK(rcmd->f == 2);
    CHECK(has_violation(validate_format(reversed), Violation::ReversedSpan));
}

TEST_CASE("validate_format accepts the canonical shape") {
    auto v = validate_format(parse(kCanonical));
    CHECK(v.valid);
    CHECK(v.violations.empty());
}

TEST_CASE("reversed span is the only violation in an otherwise canonical output") {
    auto v = validate_format(parse(
        "<think>check <span>9.00 - 5.00</span> <fps>4</fps> ok</think><answer>B</answer>"));
    REQUIRE(v.violations.size() == 1);
    CHECK(v.violations[0] == Violation::ReversedSpan);
}

TEST_CASE("out-of-range fps is the only violation in an otherwise canonical output") {
    auto v = validate_format(parse(
        "<think>check <span>5.00 - 9.00</span> <fps>9</fps> ok</think><answer>B</answer>"));
    REQUIRE(v.violations.size() == 1);
    CHECK(v.violations[0] == Violation::FpsOutOfRange);
}

TEST_CASE("assorted violations") {
    CHECK(has_violation(validate_format(parse(
              "<think><span>5.00 - 9.00</span> ok</think><answer>B</answer>")),
          Violation::MissingFps));
    CHECK(has_violation(validate_format(parse(
              "<think><fps>3</fps> ok</think><answer>B</answer>")),
          Violation::MissingSpan));
    CHECK(has_violation(validate_format(parse(
              "<think><span>5.00 - 9.00</span> <fps>3</fps> ok</think>")),
          Violation::MissingAnswer));
    CHECK(has_violation(validate_format(parse(
              "<think><span>5.00 - 9.00</span> <fps>3</fps> ok</think><answer></answer>")),
          Violation::MissingAnswer));
    CHECK(has_violation(validate_format(parse(
              "<think><span>5.0 - 9.00</span> <fps>3</fps> x</think><answer>B</answer>")),
          Violation::BadDecimalFormat));
    CHECK(has_violation(validate_format(parse(
              "<think><span>5.00 - 9.00</span> <fps>3</fps> </span></think><answer>B</answer>")),
          Violation::UnpairedTag));
    CHECK(has_violation(validate_format(parse(
              "word <think><span>5.00 - 9.00</span> <fps>3</fps> x</think><answer>B</answer>")),
          Violation::BadOrdering));
    // empty stream: the three missing pieces, nothing else
    auto v = validate_format(parse(""));
    CHECK(v.violations.size() == 3);
    CHECK(has_violation(v, Violation::MissingSpan));
    CHECK(has_violation(v, Violation::MissingFps));
    CHECK(has_violation(v, Violation::MissingAnswer));
}

TEST_CASE("first terminator wins and extra commands are flagged") {
    auto s = parse(
        "<think><span>1.00 - 2.00</span> <fps>3</fps> <span>4.00 - 5.00</span> <fps>2</fps>"
        " x</think><answer>B</answer>");
    REQUIRE(s.t_fps.has_value());
    auto cmd = parse_retrieval_command(s);
    REQUIRE(cmd.has_value());
    CHECK(cmd->t_s == doctest::Approx(1.0));
    CHECK(cmd->f == 3);
    std::size_t first_close = *s.t_fps;
    for (std::size_t i = 0; i < first_close; ++i) CHECK(s.tokens[i].role != Role::FpsClose);
    CHECK(has_violation(validate_format(s), Violation::MultipleCommands));
}

TEST_CASE("split_segments partitions at the boundary") {
    TokenStream s;
    s.tokens.resize(9);
    s.t_fps = 4;  // fifth token
    auto seg = split_segments(s);
    CHECK(seg.sampling_begin == 0);
    CHECK(seg.sampling_end == 5);
    CHECK(seg.reasoning_begin == 5);
    CHECK(seg.reasoning_end == 9);

    s.t_fps.reset();
    seg = split_segments(s);
    CHECK(seg.sampling_begin == seg.sampling_end);
    CHECK(seg.reasoning_begin == 0);
    CHECK(seg.reasoning_end == 9);

    s.t_fps = 8;  // last index: empty reasoning
    seg = split_segments(s);
    CHECK(seg.sampling_end == 9);
    CHECK(seg.reasoning_begin == seg.reasoning_end);
}

TEST_CASE("segmentation is total on parsed streams") {
    for (const char* text :
         {kCanonical.c_str(), "", "a b c", "<span>1.00 - 2.00</span><fps>4</fps> tail"}) {
        auto s = parse(text);
        auto seg = split_segments(s);
        CHECK(seg.sampling_begin == 0);
        CHECK(seg.sampling_end == seg.reasoning_begin);
        CHECK(seg.reasoning_end == s.size());
    }
}

TEST_CASE("answer extraction") {
    auto sym = extract_answer(parse("<answer>B</answer>"));
    CHECK(sym.kind == ExtractedAnswer::Kind::Symbol);
    CHECK(sym.symbol == "B");
    auto iv = extract_answer(parse("<answer>30.00 - 72.00</answer>"));
    CHECK(iv.kind == ExtractedAnswer::Kind::Interval);
    CHECK(iv.t_s == doctest::Approx(30.0));
    CHECK(iv.t_e == doctest::Approx(72.0));
    CHECK(extract_answer(parse("no answer here")).kind == ExtractedAnswer::Kind::None);
    CHECK(extract_answer(parse("<answer></answer>")).kind == ExtractedAnswer::Kind::None);
}

TEST_CASE("canonical string round-trips to the identical string") {
    CHECK(serialize(parse(kCanonical)) == kCanonical);
}

TEST_CASE("injected blocks parse as injected and round-trip") {
    std::string text =
        "<think><span>5.00 - 9.00</span> <fps>4</fps> 5.50 <|vision_start|> k02 <|vision_end|>"
        " 6.50 <|vision_start|> blank <|vision_end|> seen</think><answer>A</answer>";
    auto s = parse(text);
    CHECK(count_role(s, Role::Timestamp) == 2);
    CHECK(count_role(s, Role::FrameContent) == 2);
    CHECK(count_role(s, Role::VisionStart) == 2);
    for (const auto& t : s.tokens) {
        if (t.role == Role::Timestamp || t.role == Role::FrameContent ||
            t.role == Role::VisionStart || t.role == Role::VisionEnd)
            CHECK(t.origin == Origin::Injected);
    }
    CHECK(validate_format(s).valid);
    CHECK(serialize(s) == text);
    CHECK(parse(serialize(s)) == s);
}

TEST_CASE("round-trip identity over random streams") {
    const std::vector<std::string> pieces = {
        "<think>", "</think>", "<span>", "</span>", "<fps>", "</fps>", "<answer>",
        "</answer>", "<|vision_start|>", "<|vision_end|>", "12.00", "3.50", "-", "4",
        "9", "word", "k03", "blank", "A", "5.00", "check", "1.7", "<unk>",
    };
    auto rng = make_rng(20240801);
    std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
    std::uniform_int_distribution<int> len(0, 40);
    std::uniform_int_distribution<int> sep(0, 3);

    for (int iter = 0; iter < 1000; ++iter) {
        std::string text;
        if (iter % 5 == 0) text += kCanonical;
        int n = len(rng);
        for (int i = 0; i < n; ++i) {
            switch (sep(rng)) {
                case 0: break;
                case 1: text += ' '; break;
                case 2: text += "  "; break;
                case 3: text += '\n'; break;
            }
            text += pieces[pick(rng)];
        }
        TokenStream s = parse(text);
        TokenStream again = parse(serialize(s));
        REQUIRE(again == s);

        auto seg = split_segments(s);
        CHECK(seg.sampling_end == seg.reasoning_begin);
        CHECK(seg.reasoning_end == s.size());
        if (s.t_fps.has_value()) {
            CHECK(s.tokens[*s.t_fps].role == Role::FpsClose);
            for (std::size_t i = 0; i < *s.t_fps; ++i)
                CHECK(s.tokens[i].role != Role::FpsClose);
        }
    }
}
