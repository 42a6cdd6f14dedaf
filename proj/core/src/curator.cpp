#include "framelab/curator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "framelab/rewards.hpp"
#include "framelab/rng.hpp"
#include "framelab/vocab.hpp"

namespace framelab {

const char* source_name(SourceKind k) {
    switch (k) {
        case SourceKind::TemporalGrounding: return "temporal_grounding";
        case SourceKind::VideoQA: return "videoqa";
        case SourceKind::GroundedVQA: return "grounded_vqa";
    }
    return "?";
}

std::pair<double, double> expand_span(double start, double end, double duration,
                                      std::mt19937_64& rng) {
    std::uniform_real_distribution<double> margin(0.5, 2.0);
    double left = margin(rng);
    double right = margin(rng);
    return {std::max(0.0, start - left), std::min(duration, end + right)};
}

int assign_fps_band(SpeedClass speed, std::mt19937_64& rng) {
    return speed_band_fps(speed, rng);
}

namespace {

Token tk(std::string surface, Origin origin, bool space) {
    Token t;
    t.surface = std::move(surface);
    t.origin = origin;
    t.space_before = space;
    return t;
}

}  // namespace

std::string OracleTeacher::annotate(const Task& task, SourceKind kind) {
    (void)kind;  // both pipeline branches reuse the labels in this synthetic world
    auto rng = make_rng(hash_combine(hash_combine(seed_, task.seed), "teacher"));
    auto [es, ee] = expand_span(task.gt_start, task.gt_end, task.duration, rng);
    // Snap outward to the vocabulary grid.
    double snap_s = std::floor(es);
    double snap_e = std::min(task.duration, std::ceil(ee));

    static const std::vector<std::string> openers = {"check", "scan", "review", "observe"};
    static const std::vector<std::string> topics = {"window", "target", "evidence", "frames"};
    std::uniform_int_distribution<std::size_t> pick_open(0, openers.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_topic(0, topics.size() - 1);
    std::uniform_int_distribution<int> coin(0, 1);

    std::vector<Token> toks;
    toks.push_back(tk("<think>", Origin::Policy, false));
    toks.push_back(tk(openers[pick_open(rng)], Origin::Policy, false));
    if (coin(rng)) toks.push_back(tk(topics[pick_topic(rng)], Origin::Policy, true));
    toks.push_back(tk("<span>", Origin::Policy, true));
    toks.push_back(tk(format_seconds(snap_s), Origin::Policy, false));
    toks.push_back(tk("-", Origin::Policy, true));
    toks.push_back(tk(format_seconds(snap_e), Origin::Policy, true));
    toks.push_back(tk("</span>", Origin::Policy, false));
    toks.push_back(tk("<fps>", Origin::Policy, true));
    toks.push_back(tk(std::to_string(task.gt_fps), Origin::Policy, false));
    toks.push_back(tk("</fps>", Origin::Policy, false));

    auto times = sample_frame_times(snap_s, snap_e, task.gt_fps, world_.retrieval_budget);
    for (auto& bt : render_injection(task, times, task.gt_fps)) toks.push_back(bt);

    toks.push_back(tk("observe", Origin::Policy, true));
    toks.push_back(tk(task.target().kind, Origin::Policy, true));
    if (coin(rng)) toks.push_back(tk("evidence", Origin::Policy, true));
    toks.push_back(tk("</think>", Origin::Policy, false));
    toks.push_back(tk("<answer>", Origin::Policy, false));
    if (task.is_mc()) {
        toks.push_back(tk(task.gt_answer, Origin::Policy, false));
    } else {
        toks.push_back(tk(format_seconds(task.gt_start), Origin::Policy, false));
        toks.push_back(tk("-", Origin::Policy, true));
        toks.push_back(tk(format_seconds(task.gt_end), Origin::Policy, true));
    }
    toks.push_back(tk("</answer>", Origin::Policy, false));

    TokenStream s;
    s.tokens = std::move(toks);
    return serialize(s);
}

FilterDecision rule_filter(const RawRecord& record) {
    FilterDecision d;
    auto verdict = validate_format(parse(record.teacher_output));
    d.keep = verdict.valid;
    if (!verdict.valid) d.reason = verdict.violations.front();
    return d;
}

bool consistency_filter(const RawRecord& record, double iou_threshold) {
    auto stream = parse(record.teacher_output);
    auto answer = extract_answer(stream);
    if (record.task.is_mc()) {
        return answer.kind == ExtractedAnswer::Kind::Symbol &&
               answer.symbol == record.task.gt_answer;
    }
    if (answer.kind != ExtractedAnswer::Kind::Interval) return false;
    return temporal_iou(answer.t_s, answer.t_e, record.task.gt_start, record.task.gt_end) >=
           iou_threshold;
}

std::vector<int> mixture_counts(const std::vector<double>& ratios, int total) {
    std::vector<int> counts(ratios.size(), 0);
    std::vector<std::pair<double, std::size_t>> remainders;
    int assigned = 0;
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        double exact = ratios[i] * total;
        counts[i] = static_cast<int>(std::floor(exact));
        assigned += counts[i];
        remainders.push_back({exact - counts[i], i});
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int k = 0; k < total - assigned; ++k) counts[remainders[k].second] += 1;
    return counts;
}

std::vector<RawRecord> build_mixture(const std::vector<std::vector<RawRecord>>& pools,
                                     const std::vector<double>& ratios, int total,
                                     uint64_t seed) {
    if (pools.size() != ratios.size())
        throw std::invalid_argument("build_mixture: one ratio per pool required");
    auto counts = mixture_counts(ratios, total);
    std::vector<RawRecord> out;
    out.reserve(total);
    for (std::size_t p = 0; p < pools.size(); ++p) {
        if (static_cast<int>(pools[p].size()) < counts[p]) {
            std::string src = pools[p].empty() ? std::to_string(p)
                                               : source_name(pools[p].front().source_kind);
            throw std::invalid_argument("build_mixture: pool '" + src + "' has " +
                                        std::to_string(pools[p].size()) + " records, need " +
                                        std::to_string(counts[p]));
        }
        std::vector<std::size_t> idx(pools[p].size());
        std::iota(idx.begin(), idx.end(), 0);
        auto rng = make_rng(hash_combine(hash_combine(seed, "mixture"), p));
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(counts[p]);
        std::sort(idx.begin(), idx.end());
        for (auto i : idx) out.push_back(pools[p][i]);
    }
    return out;
}

std::vector<CorruptionLabel> corrupt_records(std::vector<RawRecord>& records,
                                             double missing_rate, double reversed_rate,
                                             double wrong_answer_rate, uint64_t seed) {
    const std::size_t n = records.size();
    std::vector<CorruptionLabel> labels(n, CorruptionLabel::None);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    auto rng = make_rng(hash_combine(seed, "corrupt"));
    std::shuffle(idx.begin(), idx.end(), rng);

    auto n_missing = static_cast<std::size_t>(std::lround(missing_rate * n));
    auto n_reversed = static_cast<std::size_t>(std::lround(reversed_rate * n));
    auto n_wrong = static_cast<std::size_t>(std::lround(wrong_answer_rate * n));

    std::size_t cursor = 0;
    auto take = [&](std::size_t count, CorruptionLabel label) {
        for (std::size_t k = 0; k < count && cursor < n; ++k, ++cursor)
            labels[idx[cursor]] = label;
    };
    take(n_missing, CorruptionLabel::MissingField);
    take(n_reversed, CorruptionLabel::ReversedSpan);
    take(n_wrong, CorruptionLabel::WrongAnswer);

    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] == CorruptionLabel::None) continue;
        auto stream = parse(records[i].teacher_output);
        auto& toks = stream.tokens;
        if (labels[i] == CorruptionLabel::MissingField) {
            // Drop the whole fps construct.
            for (std::size_t t = 0; t + 2 < toks.size(); ++t) {
                if (toks[t].surface == "<fps>" && toks[t + 2].surface == "</fps>") {
                    toks.erase(toks.begin() + static_cast<std::ptrdiff_t>(t),
                               toks.begin() + static_cast<std::ptrdiff_t>(t + 3));
                    break;
                }
            }
        } else if (labels[i] == CorruptionLabel::ReversedSpan) {
            for (std::size_t t = 0; t + 4 < toks.size(); ++t) {
                if (toks[t].surface == "<span>") {
                    std::swap(toks[t + 1].surface, toks[t + 3].surface);
                    break;
                }
            }
        } else {
            const Task& task = records[i].task;
            if (task.is_mc()) {
                for (std::size_t t = 0; t + 1 < toks.size(); ++t) {
                    if (toks[t].surface != "<answer>") continue;
                    const auto& letters = Vocab::letters();
                    std::size_t cur = 0;
                    for (std::size_t l = 0; l < letters.size(); ++l)
                        if (letters[l] == toks[t + 1].surface) cur = l;
                    std::size_t n_choices = task.choices.size();
                    toks[t + 1].surface = letters[(cur + 1) % std::max<std::size_t>(n_choices, 2)];
                    break;
                }
            } else {
                // Replace the grounded answer with a disjoint window.
                double s, e;
                if (task.gt_start > 2.5) {
                    s = 0.0;
                    e = 1.0;
                } else {
                    s = task.duration - 1.0;
                    e = task.duration;
                }
                for (std::size_t t = 0; t + 4 < toks.size(); ++t) {
                    if (toks[t].surface == "<answer>") {
                        toks[t + 1].surface = format_seconds(s);
                        toks[t + 3].surface = format_seconds(e);
                        break;
                    }
                }
            }
        }
        records[i].teacher_output = serialize(stream);
    }
    return labels;
}

namespace {

std::vector<RawRecord> make_pool(TeacherClient& teacher, const WorldConfig& world,
                                 SourceKind kind, int count, uint64_t seed) {
    WorldConfig w = world;
    w.question_mc_fraction = kind == SourceKind::TemporalGrounding ? 0.0 : 1.0;
    std::vector<RawRecord> pool;
    pool.reserve(count);
    uint64_t base = hash_combine(hash_combine(seed, "pool"), source_name(kind));
    for (int i = 0; i < count; ++i) {
        RawRecord rec;
        rec.task = generate_task(hash_combine(base, i), w);
        rec.source_kind = kind;
        rec.teacher_output = teacher.annotate(rec.task, kind);
        pool.push_back(std::move(rec));
    }
    return pool;
}

}  // namespace

CurationResult curate(TeacherClient& teacher, const WorldConfig& world,
                      const CuratorConfig& cfg) {
    CurationResult res;
    std::vector<std::vector<RawRecord>> kept_pools;
    const SourceKind kinds[] = {SourceKind::TemporalGrounding, SourceKind::VideoQA,
                                SourceKind::GroundedVQA};
    const int sizes[] = {cfg.pool_temporal_grounding, cfg.pool_videoqa, cfg.pool_grounded_vqa};
    for (int k = 0; k < 3; ++k) {
        auto pool = make_pool(teacher, world, kinds[k], sizes[k], cfg.seed);
        res.raw_count += static_cast<int>(pool.size());
        std::vector<RawRecord> kept;
        for (auto& rec : pool) {
            auto rd = rule_filter(rec);
            if (!rd.keep) {
                res.drops.push_back({rec.source_kind, rec.task.seed, "rule",
                                     violation_name(*rd.reason)});
                continue;
            }
            if (!consistency_filter(rec, cfg.consistency_iou)) {
                res.drops.push_back(
                    {rec.source_kind, rec.task.seed, "consistency", "answer_mismatch"});
                continue;
            }
            kept.push_back(std::move(rec));
        }
        kept_pools.push_back(std::move(kept));
    }
    res.dataset = build_mixture(kept_pools, cfg.ratios, cfg.total, cfg.seed);
    return res;
}

SftExample record_to_example(const RawRecord& record, const WorldConfig& world) {
    SftExample ex;
    ex.prompt = initial_observation(record.task, world);
    ex.target = parse(record.teacher_output, Origin::Policy);
    return ex;
}

}  // namespace framelab
