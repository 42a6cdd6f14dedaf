#include "framelab/context_cost.hpp"

#include <algorithm>
#include <stdexcept>

namespace framelab {

long frame_token_cost(const CostModel& model) {
    if (model.merge <= 0 || model.grid_h <= 0 || model.grid_w <= 0)
        throw std::invalid_argument("cost model: dimensions must be positive");
    if (model.grid_h % model.merge != 0 || model.grid_w % model.merge != 0)
        throw std::invalid_argument("cost model: merge size must divide the grid");
    long pads = static_cast<long>(model.grid_h) * model.grid_w / (model.merge * model.merge);
    return model.timestamp_tokens + model.boundary_tokens + pads;
}

long trajectory_context_length(const TrajectoryShape& shape, const CostModel& model) {
    if (shape.initial_frames < 0 || shape.text_tokens < 0)
        throw std::invalid_argument("trajectory shape: counts must be non-negative");
    long per_frame = frame_token_cost(model);
    long frames = shape.initial_frames;
    for (long f : shape.retrieved_frames) {
        if (f < 0) throw std::invalid_argument("trajectory shape: counts must be non-negative");
        frames += f;
    }
    return shape.text_tokens + frames * per_frame;
}

std::vector<ProtocolReport> compare_protocols(const std::vector<ProtocolDescriptor>& protocols,
                                              const CostModel& model) {
    std::vector<ProtocolReport> out;
    for (const auto& p : protocols) {
        TrajectoryShape shape;
        shape.initial_frames = p.initial_frames;
        shape.text_tokens = p.text_tokens;
        shape.retrieved_frames.assign(p.rounds, p.frames_per_round);
        ProtocolReport r;
        r.name = p.name;
        r.rounds = p.rounds;
        r.total_frames = p.initial_frames + static_cast<long>(p.rounds) * p.frames_per_round;
        r.total_tokens = trajectory_context_length(shape, model);
        out.push_back(std::move(r));
    }
    std::stable_sort(out.begin(), out.end(), [](const ProtocolReport& a, const ProtocolReport& b) {
        return a.total_tokens < b.total_tokens;
    });
    return out;
}

std::string protocol_report_csv(const std::vector<ProtocolReport>& reports) {
    std::string out = "name,rounds,total_frames,total_tokens\n";
    for (const auto& r : reports) {
        out += r.name + "," + std::to_string(r.rounds) + "," + std::to_string(r.total_frames) +
               "," + std::to_string(r.total_tokens) + "\n";
    }
    return out;
}

}  // namespace framelab
