#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "framelab/policy.hpp"
#include "framelab/tokens.hpp"

namespace framelab {

struct SftExample {
    TokenStream prompt;  // question plus initial observation
    TokenStream target;  // full trajectory including the injected block
};

struct SftConfig {
    double learning_rate = 0.02;
    int steps = 3000;
    int batch_size = 8;        // 0 = full batch
    uint64_t seed = 0;
    bool mask_all_video = false;  // also drop timestamp/boundary targets from the loss
    bool adam = true;          // adaptive moments; plain gradient descent when false
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    // Decoupled decay pushes rote per-token fits toward the cue channels;
    // the channel gates themselves are decay-free.
    double weight_decay = 0.02;
};

// Loss positions: every target token except frame-content placeholders.
// Timestamp and vision-boundary targets stay in unless mask_all_video is set.
std::vector<uint8_t> sft_mask(const TokenStream& target, bool mask_all_video);

struct SftLoss {
    double loss = 0.0;
    std::vector<double> grad;
};

// Mean negative log-likelihood over the masked positions. Throws when the
// mask is empty.
SftLoss sft_loss(const PolicyParams& params, const SftExample& example, bool mask_all_video);

// Convenience without gradient (evaluation).
double sft_loss_value(const PolicyParams& params, const SftExample& example,
                      bool mask_all_video);

struct SftResult {
    PolicyParams params;
    std::vector<double> loss_curve;  // per-step minibatch loss
};

SftResult run_sft(const PolicyParams& init, const std::vector<SftExample>& dataset,
                  const SftConfig& cfg);

// Line format: prompt string, tab, target string.
void save_sft_dataset(const std::string& path, const std::vector<SftExample>& dataset);
std::vector<SftExample> load_sft_dataset(const std::string& path);

}  // namespace framelab
