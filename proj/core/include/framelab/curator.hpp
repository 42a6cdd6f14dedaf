#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "framelab/sft.hpp"
#include "framelab/tokens.hpp"
#include "framelab/world.hpp"

namespace framelab {

enum class SourceKind { TemporalGrounding, VideoQA, GroundedVQA };
const char* source_name(SourceKind k);

struct RawRecord {
    Task task;
    std::string teacher_output;
    SourceKind source_kind = SourceKind::VideoQA;
};

// Annotation seam: any external annotator can sit behind this. The default
// oracle teacher is deterministic under its seed.
class TeacherClient {
public:
    virtual ~TeacherClient() = default;
    virtual std::string annotate(const Task& task, SourceKind kind) = 0;
};

// Emits canonical trajectories with the expanded span, the true fps, a short
// templated reasoning text, the rendered injection block, and the exact
// answer (original boundaries for grounding).
class OracleTeacher : public TeacherClient {
public:
    OracleTeacher(uint64_t seed, WorldConfig world) : seed_(seed), world_(std::move(world)) {}
    std::string annotate(const Task& task, SourceKind kind) override;

private:
    uint64_t seed_;
    WorldConfig world_;
};

// Widens [start,end] by independent Uniform[0.5, 2.0] margins, clamped to the
// timeline; the result always contains the original span.
std::pair<double, double> expand_span(double start, double end, double duration,
                                      std::mt19937_64& rng);

struct FilterDecision {
    bool keep = false;
    std::optional<Violation> reason;  // first violation when dropped
};

FilterDecision rule_filter(const RawRecord& record);

// Keep when the teacher's answer agrees with the label: exact for multiple
// choice, IoU >= threshold for grounding.
bool consistency_filter(const RawRecord& record, double iou_threshold = 0.5);

int assign_fps_band(SpeedClass speed, std::mt19937_64& rng);

// Largest-remainder apportionment of total over ratios.
std::vector<int> mixture_counts(const std::vector<double>& ratios, int total);

// Samples without replacement from each pool to the apportioned counts,
// order-stable within each pool. Throws naming the deficient source.
std::vector<RawRecord> build_mixture(const std::vector<std::vector<RawRecord>>& pools,
                                     const std::vector<double>& ratios, int total,
                                     uint64_t seed);

enum class CorruptionLabel { None, MissingField, ReversedSpan, WrongAnswer };

// Deterministically corrupts exact fractions of a pool in place and returns
// the per-record labels (used to test filter precision/recall).
std::vector<CorruptionLabel> corrupt_records(std::vector<RawRecord>& records,
                                             double missing_rate, double reversed_rate,
                                             double wrong_answer_rate, uint64_t seed);

struct CuratorConfig {
    int pool_temporal_grounding = 500;
    int pool_videoqa = 700;
    int pool_grounded_vqa = 400;
    std::vector<double> ratios = {0.30, 0.45, 0.25};
    int total = 1000;
    double consistency_iou = 0.5;
    uint64_t seed = 0;
};

struct DropLogEntry {
    SourceKind source;
    uint64_t task_seed;
    std::string stage;   // "rule" or "consistency"
    std::string reason;
};

struct CurationResult {
    std::vector<RawRecord> dataset;  // mixed, filtered
    std::vector<DropLogEntry> drops;
    int raw_count = 0;
};

CurationResult curate(TeacherClient& teacher, const WorldConfig& world,
                      const CuratorConfig& cfg);

SftExample record_to_example(const RawRecord& record, const WorldConfig& world);

}  // namespace framelab
