#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "framelab/tokens.hpp"

namespace framelab {

enum class SpeedClass { Static, Moderate, Rapid };
enum class QuestionKind { MultipleChoice, Grounding };

struct Event {
    std::string kind;
    double start = 0.0;
    double end = 0.0;
    SpeedClass speed = SpeedClass::Static;
    int evidence_fps = 1;  // minimum sampling density at which the event is visible
};

struct Task {
    uint64_t seed = 0;
    double duration = 0.0;
    std::vector<Event> events;
    std::size_t target_index = 0;
    QuestionKind question_kind = QuestionKind::MultipleChoice;
    std::vector<std::string> choices;  // MultipleChoice only
    double gt_start = 0.0;
    double gt_end = 0.0;
    int gt_fps = 1;
    std::string gt_answer;  // choice letter, or "S - E" for grounding

    const Event& target() const { return events[target_index]; }
    bool is_mc() const { return question_kind == QuestionKind::MultipleChoice; }
};

struct WorldConfig {
    double duration_min = 30.0;
    double duration_max = 120.0;
    int alphabet = 12;
    int distractors = 3;
    int n_choices = 4;
    double p_static = 1.0 / 3.0;
    double p_moderate = 1.0 / 3.0;  // remainder is rapid
    double question_mc_fraction = 1.0;
    double initial_fps = 2.0;
    int initial_budget = 48;
    int retrieval_budget = 128;
    double grounding_hint_margin = 5.0;
    int max_seconds = 120;
};

struct FrameSet {
    std::vector<double> timestamps;
    std::vector<std::string> contents;
};

// Deterministic in (seed, config). Throws std::invalid_argument when the
// alphabet cannot cover the answer choices or the distractors.
Task generate_task(uint64_t seed, const WorldConfig& cfg);

// N = floor((t_e - t_s) * fps), clamped below by one frame and above by the
// budget via even subsampling; frames sit at midpoints of N equal slots.
std::vector<double> sample_frame_times(double t_s, double t_e, double fps, int budget);

// Which event is active at time t, if any.
std::optional<std::size_t> event_at(const Task& task, double t);

// Visibility rule: the active event's kind when fps reaches its evidence
// threshold, otherwise the background symbol.
FrameSet make_frame_set(const Task& task, const std::vector<double>& times, double fps);

// Injected block: per frame [timestamp, <|vision_start|>, content, <|vision_end|>].
std::vector<Token> render_injection(const Task& task, const std::vector<double>& times,
                                    double fps);

// Question tokens (Prompt origin) followed by the whole timeline rendered at f1.
TokenStream initial_observation(const Task& task, const WorldConfig& cfg);
TokenStream initial_observation(const Task& task, const WorldConfig& cfg, double f1);

// Brute-force answer from a maximum-density scan of the timeline.
std::string oracle_answer(const Task& task);

int speed_band_fps(SpeedClass speed, std::mt19937_64& rng);
const char* speed_name(SpeedClass s);

// Injection hook for rollouts: validates the command, samples frames, renders
// the block. fixed_fps overrides the sampling density but not the command.
Injector make_injector(const Task& task, const WorldConfig& cfg,
                       std::optional<int> fixed_fps = std::nullopt);

// One task per line.
std::string task_to_line(const Task& task);
Task task_from_line(const std::string& line);
void save_tasks(const std::string& path, const std::vector<Task>& tasks);
std::vector<Task> load_tasks(const std::string& path);

}  // namespace framelab
