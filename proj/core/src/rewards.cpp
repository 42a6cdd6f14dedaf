#include "framelab/rewards.hpp"

#include <algorithm>
#include <cmath>

namespace framelab {

double temporal_iou(double a_s, double a_e, double b_s, double b_e) {
    double inter = std::min(a_e, b_e) - std::max(a_s, b_s);
    if (inter < 0.0) inter = 0.0;
    double uni = (a_e - a_s) + (b_e - b_s) - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

double fps_reward(double f_hat, double f_star, double f_max) {
    return std::max(0.0, 1.0 - std::abs(f_hat - f_star) / f_max);
}

double sampling_reward(const std::optional<RetrievalCommand>& cmd, double gt_s, double gt_e,
                       int gt_fps, const RewardWeights& w) {
    if (!cmd.has_value()) return 0.0;
    if (!(cmd->t_e > cmd->t_s)) return 0.0;
    double iou = temporal_iou(cmd->t_s, cmd->t_e, gt_s, gt_e);
    double ft = fps_reward(cmd->f, gt_fps, w.f_max);
    return w.lambda1 * iou + w.lambda2 * ft;
}

double answer_reward(const ExtractedAnswer& predicted, const Task& task) {
    if (task.is_mc()) {
        if (predicted.kind != ExtractedAnswer::Kind::Symbol) return 0.0;
        return predicted.symbol == task.gt_answer ? 1.0 : 0.0;
    }
    if (predicted.kind != ExtractedAnswer::Kind::Interval) return 0.0;
    if (!(predicted.t_e > predicted.t_s)) return 0.0;
    return temporal_iou(predicted.t_s, predicted.t_e, task.gt_start, task.gt_end);
}

RewardBreakdown score_rollout(const TokenStream& traj, const Task& task,
                              const RewardWeights& w) {
    RewardBreakdown out;
    out.r_format = validate_format(traj).valid ? 1.0 : 0.0;
    auto cmd = parse_retrieval_command(traj);
    if (cmd.has_value() && cmd->t_e > cmd->t_s) {
        out.iou = temporal_iou(cmd->t_s, cmd->t_e, task.gt_start, task.gt_end);
        out.fps_term = fps_reward(cmd->f, task.gt_fps, w.f_max);
    }
    out.r_samp = sampling_reward(cmd, task.gt_start, task.gt_end, task.gt_fps, w);
    out.r_ans = answer_reward(extract_answer(traj), task);
    return out;
}

}  // namespace framelab
