#pragma once

#include <string>
#include <vector>

namespace framelab {

// Token cost model for a single forward pass over an interleaved trajectory.
struct CostModel {
    int grid_h = 16;
    int grid_w = 16;
    int merge = 2;            // patch merge size; must divide both grid dims
    int timestamp_tokens = 1;
    int boundary_tokens = 2;
};

// timestamp + boundary + grid_h*grid_w/merge^2 placeholder tokens per frame.
// Throws when the merge size does not divide the grid.
long frame_token_cost(const CostModel& model);

struct TrajectoryShape {
    long initial_frames = 0;
    std::vector<long> retrieved_frames;  // one entry per retrieval round
    long text_tokens = 0;
};

long trajectory_context_length(const TrajectoryShape& shape, const CostModel& model);

struct ProtocolDescriptor {
    std::string name;
    int rounds = 0;
    long frames_per_round = 0;
    long initial_frames = 0;
    long text_tokens = 0;
};

struct ProtocolReport {
    std::string name;
    int rounds = 0;
    long total_frames = 0;
    long total_tokens = 0;
};

// Totals per protocol, ascending by context length.
std::vector<ProtocolReport> compare_protocols(const std::vector<ProtocolDescriptor>& protocols,
                                              const CostModel& model);

std::string protocol_report_csv(const std::vector<ProtocolReport>& reports);

}  // namespace framelab
