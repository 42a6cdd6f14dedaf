#include "framelab/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "framelab/rng.hpp"
#include "framelab/vocab.hpp"

namespace framelab {

namespace {

Token make_token(std::string surface, Role role, Origin origin, bool space = true) {
    Token t;
    t.surface = std::move(surface);
    t.role = role;
    t.origin = origin;
    t.space_before = space;
    return t;
}

void push_prompt_words(std::vector<Token>& out, std::initializer_list<std::string> words) {
    for (const auto& w : words)
        out.push_back(make_token(w, Role::Text, Origin::Prompt, !out.empty()));
}

double draw_integer_seconds(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_int_distribution<long> d(static_cast<long>(lo), static_cast<long>(hi));
    return static_cast<double>(d(rng));
}

}  // namespace

const char* speed_name(SpeedClass s) {
    switch (s) {
        case SpeedClass::Static: return "static";
        case SpeedClass::Moderate: return "moderate";
        case SpeedClass::Rapid: return "rapid";
    }
    return "?";
}

int speed_band_fps(SpeedClass speed, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> coin(0, 1);
    switch (speed) {
        case SpeedClass::Static: return 1 + coin(rng);
        case SpeedClass::Moderate: return 3 + coin(rng);
        case SpeedClass::Rapid: return 5 + coin(rng);
    }
    return 1;
}

std::optional<std::size_t> event_at(const Task& task, double t) {
    for (std::size_t i = 0; i < task.events.size(); ++i) {
        if (t >= task.events[i].start && t < task.events[i].end) return i;
    }
    return std::nullopt;
}

Task generate_task(uint64_t seed, const WorldConfig& cfg) {
    if (cfg.alphabet < cfg.n_choices)
        throw std::invalid_argument("world: alphabet smaller than answer choice count");
    if (cfg.alphabet < cfg.distractors + 1)
        throw std::invalid_argument("world: alphabet cannot cover distractor kinds");
    if (cfg.n_choices < 2 || cfg.n_choices > static_cast<int>(Vocab::letters().size()))
        throw std::invalid_argument("world: answer choice count out of range");

    auto rng = make_rng(hash_combine(seed, "task"));
    Task task;
    task.seed = seed;
    task.duration = draw_integer_seconds(rng, cfg.duration_min, cfg.duration_max);

    std::vector<int> kinds(cfg.alphabet);
    std::iota(kinds.begin(), kinds.end(), 0);
    std::shuffle(kinds.begin(), kinds.end(), rng);

    auto draw_speed = [&](std::mt19937_64& r) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double x = u(r);
        if (x < cfg.p_static) return SpeedClass::Static;
        if (x < cfg.p_static + cfg.p_moderate) return SpeedClass::Moderate;
        return SpeedClass::Rapid;
    };

    auto overlaps_any = [&](double s, double e) {
        for (const auto& ev : task.events)
            if (s < ev.end && ev.start < e) return true;
        return false;
    };

    // Target event.
    Event target;
    target.kind = Vocab::kind_symbol(kinds[0]);
    target.speed = draw_speed(rng);
    target.evidence_fps = speed_band_fps(target.speed, rng);
    double len = draw_integer_seconds(rng, 3, 8);
    double start = draw_integer_seconds(rng, 0, task.duration - len);
    target.start = start;
    target.end = start + len;
    task.events.push_back(target);
    task.target_index = 0;
    task.gt_start = target.start;
    task.gt_end = target.end;
    task.gt_fps = target.evidence_fps;

    // Distractors: distinct kinds, disjoint spans.
    for (int d = 0; d < cfg.distractors; ++d) {
        Event ev;
        ev.kind = Vocab::kind_symbol(kinds[1 + d]);
        ev.speed = draw_speed(rng);
        ev.evidence_fps = speed_band_fps(ev.speed, rng);
        double elen = draw_integer_seconds(rng, 2, 8);
        bool placed = false;
        for (int attempt = 0; attempt < 40 && !placed; ++attempt) {
            double es = draw_integer_seconds(rng, 0, task.duration - elen);
            if (!overlaps_any(es, es + elen)) {
                ev.start = es;
                ev.end = es + elen;
                task.events.push_back(ev);
                placed = true;
            }
        }
    }

    std::uniform_real_distribution<double> u(0.0, 1.0);
    task.question_kind = u(rng) < cfg.question_mc_fraction ? QuestionKind::MultipleChoice
                                                           : QuestionKind::Grounding;
    if (task.is_mc()) {
        std::vector<int> others;
        for (int k : kinds)
            if (Vocab::kind_symbol(k) != target.kind) others.push_back(k);
        std::shuffle(others.begin(), others.end(), rng);
        task.choices.assign(1, target.kind);
        for (int i = 0; i < cfg.n_choices - 1; ++i)
            task.choices.push_back(Vocab::kind_symbol(others[i]));
        std::shuffle(task.choices.begin(), task.choices.end(), rng);
        for (std::size_t i = 0; i < task.choices.size(); ++i) {
            if (task.choices[i] == target.kind) task.gt_answer = Vocab::letters()[i];
        }
    } else {
        task.gt_answer = format_seconds(task.gt_start) + " - " + format_seconds(task.gt_end);
    }
    return task;
}

std::vector<double> sample_frame_times(double t_s, double t_e, double fps, int budget) {
    if (!(t_e > t_s)) throw std::invalid_argument("sample_frame_times: reversed or empty span");
    if (!(fps > 0.0)) throw std::invalid_argument("sample_frame_times: fps must be positive");
    if (budget < 1) throw std::invalid_argument("sample_frame_times: budget must be >= 1");
    const double len = t_e - t_s;
    long n = static_cast<long>(std::floor(len * fps + 1e-9));
    if (n < 1) n = 1;
    std::vector<double> out;
    if (n <= budget) {
        out.reserve(n);
        for (long i = 0; i < n; ++i) out.push_back(t_s + (i + 0.5) * len / static_cast<double>(n));
    } else {
        out.reserve(budget);
        for (int k = 0; k < budget; ++k) {
            long idx = static_cast<long>(std::floor((k + 0.5) * static_cast<double>(n) /
                                                    static_cast<double>(budget)));
            out.push_back(t_s + (idx + 0.5) * len / static_cast<double>(n));
        }
    }
    return out;
}

FrameSet make_frame_set(const Task& task, const std::vector<double>& times, double fps) {
    FrameSet fs;
    fs.timestamps = times;
    fs.contents.reserve(times.size());
    for (double t : times) {
        auto idx = event_at(task, t);
        if (idx.has_value() && fps >= task.events[*idx].evidence_fps) {
            fs.contents.push_back(task.events[*idx].kind);
        } else {
            fs.contents.push_back(Vocab::background_symbol());
        }
    }
    return fs;
}

std::vector<Token> render_injection(const Task& task, const std::vector<double>& times,
                                    double fps) {
    FrameSet fs = make_frame_set(task, times, fps);
    std::vector<Token> out;
    out.reserve(times.size() * 4);
    for (std::size_t i = 0; i < fs.timestamps.size(); ++i) {
        out.push_back(make_token(format_seconds(fs.timestamps[i]), Role::Timestamp, Origin::Injected));
        out.push_back(make_token("<|vision_start|>", Role::VisionStart, Origin::Injected));
        out.push_back(make_token(fs.contents[i], Role::FrameContent, Origin::Injected));
        out.push_back(make_token("<|vision_end|>", Role::VisionEnd, Origin::Injected));
    }
    return out;
}

TokenStream initial_observation(const Task& task, const WorldConfig& cfg) {
    return initial_observation(task, cfg, cfg.initial_fps);
}

TokenStream initial_observation(const Task& task, const WorldConfig& cfg, double f1) {
    TokenStream s;
    auto& toks = s.tokens;
    const Event& target = task.target();
    if (task.is_mc()) {
        push_prompt_words(toks, {"which", "event", "between", format_seconds(task.gt_start),
                                 "and", format_seconds(task.gt_end), speed_name(target.speed),
                                 "duration", format_seconds(task.duration), "choices"});
        for (std::size_t i = 0; i < task.choices.size(); ++i) {
            push_prompt_words(toks, {Vocab::letters()[i], task.choices[i]});
        }
    } else {
        double hs = std::max(0.0, task.gt_start - cfg.grounding_hint_margin);
        double he = std::min(task.duration, task.gt_end + cfg.grounding_hint_margin);
        push_prompt_words(toks, {"locate", target.kind, speed_name(target.speed), "around",
                                 format_seconds(hs), "and", format_seconds(he), "duration",
                                 format_seconds(task.duration)});
    }
    auto times = sample_frame_times(0.0, task.duration, f1, cfg.initial_budget);
    auto block = render_injection(task, times, f1);
    toks.insert(toks.end(), block.begin(), block.end());
    return s;
}

std::string oracle_answer(const Task& task) {
    if (!task.is_mc())
        return format_seconds(task.gt_start) + " - " + format_seconds(task.gt_end);
    auto times = sample_frame_times(0.0, task.duration, 6.0, 1 << 20);
    FrameSet fs = make_frame_set(task, times, 6.0);
    for (std::size_t i = 0; i < fs.timestamps.size(); ++i) {
        double t = fs.timestamps[i];
        if (t < task.gt_start || t >= task.gt_end) continue;
        const std::string& kind = fs.contents[i];
        if (kind == Vocab::background_symbol()) continue;
        for (std::size_t c = 0; c < task.choices.size(); ++c)
            if (task.choices[c] == kind) return Vocab::letters()[c];
    }
    return "";
}

Injector make_injector(const Task& task, const WorldConfig& cfg, std::optional<int> fixed_fps) {
    return [task, cfg, fixed_fps](const RetrievalCommand& cmd)
               -> std::optional<std::vector<Token>> {
        if (cmd.f < 1 || cmd.f > 6) return std::nullopt;
        double s = std::max(0.0, cmd.t_s);
        double e = std::min(task.duration, cmd.t_e);
        if (!(e > s)) return std::nullopt;
        int density = fixed_fps.value_or(cmd.f);
        auto times = sample_frame_times(s, e, density, cfg.retrieval_budget);
        return render_injection(task, times, density);
    };
}

namespace {

nlohmann::json event_to_json(const Event& e) {
    return {{"kind", e.kind}, {"start", e.start}, {"end", e.end},
            {"speed", speed_name(e.speed)}, {"evidence_fps", e.evidence_fps}};
}

SpeedClass speed_from_name(const std::string& s) {
    if (s == "static") return SpeedClass::Static;
    if (s == "moderate") return SpeedClass::Moderate;
    if (s == "rapid") return SpeedClass::Rapid;
    throw std::invalid_argument("unknown speed class: " + s);
}

}  // namespace

std::string task_to_line(const Task& task) {
    nlohmann::json j;
    j["seed"] = task.seed;
    j["duration"] = task.duration;
    j["target_index"] = task.target_index;
    j["question_kind"] = task.is_mc() ? "mc" : "grounding";
    j["choices"] = task.choices;
    j["gt_start"] = task.gt_start;
    j["gt_end"] = task.gt_end;
    j["gt_fps"] = task.gt_fps;
    j["gt_answer"] = task.gt_answer;
    j["events"] = nlohmann::json::array();
    for (const auto& e : task.events) j["events"].push_back(event_to_json(e));
    return j.dump();
}

Task task_from_line(const std::string& line) {
    nlohmann::json j = nlohmann::json::parse(line);
    Task task;
    task.seed = j.at("seed").get<uint64_t>();
    task.duration = j.at("duration").get<double>();
    task.target_index = j.at("target_index").get<std::size_t>();
    task.question_kind = j.at("question_kind").get<std::string>() == "mc"
                             ? QuestionKind::MultipleChoice
                             : QuestionKind::Grounding;
    task.choices = j.at("choices").get<std::vector<std::string>>();
    task.gt_start = j.at("gt_start").get<double>();
    task.gt_end = j.at("gt_end").get<double>();
    task.gt_fps = j.at("gt_fps").get<int>();
    task.gt_answer = j.at("gt_answer").get<std::string>();
    for (const auto& je : j.at("events")) {
        Event e;
        e.kind = je.at("kind").get<std::string>();
        e.start = je.at("start").get<double>();
        e.end = je.at("end").get<double>();
        e.speed = speed_from_name(je.at("speed").get<std::string>());
        e.evidence_fps = je.at("evidence_fps").get<int>();
        task.events.push_back(e);
    }
    return task;
}

void save_tasks(const std::string& path, const std::vector<Task>& tasks) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& t : tasks) out << task_to_line(t) << "\n";
}

std::vector<Task> load_tasks(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read " + path);
    std::vector<Task> tasks;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) tasks.push_back(task_from_line(line));
    }
    return tasks;
}

}  // namespace framelab
