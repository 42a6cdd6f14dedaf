#pragma once

#include <optional>

#include "framelab/tokens.hpp"
#include "framelab/world.hpp"

namespace framelab {

struct RewardWeights {
    double lambda1 = 0.5;  // span overlap weight
    double lambda2 = 0.5;  // fps matching weight
    double f_max = 6.0;
    double ans_weight = 1.0;
    double format_weight = 1.0;
};

struct RewardBreakdown {
    double r_samp = 0.0;
    double r_ans = 0.0;
    double r_format = 0.0;  // binary
    double iou = 0.0;
    double fps_term = 0.0;
};

// |a n b| / |a u b| over [start,end] intervals; zero when the union is empty.
double temporal_iou(double a_s, double a_e, double b_s, double b_e);

// max(0, 1 - |f_hat - f_star| / f_max): full credit at equality, zero beyond f_max.
double fps_reward(double f_hat, double f_star, double f_max);

// lambda1 * IoU + lambda2 * fps term; zero for an absent or reversed command.
double sampling_reward(const std::optional<RetrievalCommand>& cmd, double gt_s, double gt_e,
                       int gt_fps, const RewardWeights& w);

// Exact symbol match for multiple choice, temporal IoU for grounding.
double answer_reward(const ExtractedAnswer& predicted, const Task& task);

RewardBreakdown score_rollout(const TokenStream& traj, const Task& task,
                              const RewardWeights& w);

}  // namespace framelab
