#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "framelab/tokens.hpp"
#include "framelab/vocab.hpp"

namespace framelab {

// One hidden layer over sparse context features, plus a handful of gated
// fixed bias channels that surface question cues and injected evidence to the
// output logits. Gradients are hand-derived and exact.
struct ArchSpec {
    VocabSpec vocab;
    int hidden = 32;
    int max_context = 2048;

    bool operator==(const ArchSpec& o) const {
        return vocab == o.vocab && hidden == o.hidden && max_context == o.max_context;
    }
};

struct PolicyParams {
    ArchSpec arch;
    std::vector<double> values;
};

// Gated bias channels appended to the logits (cue kernels, evidence binding);
// their gates sit at the tail of the parameter vector.
inline constexpr std::size_t kPolicyGateCount = 6;

std::size_t feature_dim(const ArchSpec& arch);
std::size_t param_count(const ArchSpec& arch);

PolicyParams zero_params(const ArchSpec& arch);
PolicyParams init_params(const ArchSpec& arch, uint64_t seed, double scale = 0.05);

void save_checkpoint(const std::string& path, const PolicyParams& params);
PolicyParams load_checkpoint(const std::string& path);

struct SampleOptions {
    double temperature = 1.0;
    int max_new_tokens = 256;
    uint64_t seed = 0;
};

struct RolloutRecord {
    TokenStream stream;                        // prompt + completion + injections
    std::size_t prompt_size = 0;               // leading environment tokens
    std::vector<std::size_t> policy_positions; // stream indices of policy tokens
    std::vector<double> logp_current;
    std::vector<double> logp_old;
    std::vector<double> logp_ref;
    bool truncated = false;

    std::size_t policy_token_count() const { return policy_positions.size(); }
    // Number of policy tokens at or before the retrieval terminator.
    std::size_t sampling_token_count() const;
};

// Streaming forward/backward evaluator bound to one parameter snapshot.
// push() advances the context; the step functions act at the next position.
class PolicyEvaluator {
public:
    explicit PolicyEvaluator(const PolicyParams& params);

    void reset();
    void push(const Token& t);

    // Distribution over the vocabulary at the current position (temperature 1).
    const std::vector<double>& distribution();

    double logp(int token_id);
    // Adds weight * logp(token_id) to the returned value and the exact
    // parameter gradient of that term into grad (same layout as values).
    double logp_with_grad(int token_id, double weight, std::vector<double>& grad);

    int sample(double temperature, double u01);  // u01 in [0,1)

    const Vocab& vocab() const { return vocab_; }

private:
    void ensure_step();

    const PolicyParams& params_;
    Vocab vocab_;
    // cached parameter layout
    std::size_t dim_f_ = 0, dim_h_ = 0, dim_v_ = 0;
    std::size_t off_w1_ = 0, off_b1_ = 0, off_w2_ = 0, off_b2_ = 0, off_gates_ = 0;
    // context state
    std::vector<int> recent_ids_;
    int prev_id_ = -1;
    TokClass prev_class_ = TokClass::Bos;
    int policy_count_ = 0;
    std::size_t context_len_ = 0;
    bool in_span_ = false, in_fps_ = false, in_answer_ = false;
    int span_numerals_ = 0;
    int answer_len_ = 0;
    bool in_think_ = false, think_done_ = false;
    // retrieval phase: frames implied by the emitted command vs frames seen
    double own_span_start_ = -1.0, own_span_end_ = -1.0;
    int own_fps_ = 0;
    long frames_expected_ = 0;
    long frames_seen_ = 0;
    bool command_closed_ = false;
    // prompt-derived cues
    bool is_mc_ = false;
    bool have_cue_ = false;
    double cue_start_ = 0.0, cue_end_ = 0.0;
    int cue_state_ = 0;
    double fps_cue_center_ = 0.0;  // 1.5 / 3.5 / 5.5 from the speed word, 0 = none
    double prompt_duration_ = -1.0;
    bool expect_duration_ = false;
    std::vector<std::string> choice_kinds_;
    std::string ground_kind_;
    int choice_state_ = -1;
    bool expect_ground_kind_ = false;
    // evidence accumulators
    double last_timestamp_ = -1.0;
    std::vector<double> choice_evidence_;
    double evidence_total_ = 0.0;
    double ground_first_ = -1.0, ground_last_ = -1.0;
    // per-step scratch
    bool step_ready_ = false;
    std::vector<std::pair<int, double>> feats_;
    std::vector<std::vector<std::pair<int, double>>> channels_;
    std::vector<double> hidden_pre_, hidden_, logits_, probs_;
    double log_z_ = 0.0;
};

// Autoregressive sampling with on-the-fly injection at the first </fps>.
// Log-probs are recorded for policy tokens only; logp_old starts equal to
// logp_current (behaviour snapshot), logp_ref is left for the caller.
RolloutRecord sample_rollout(const PolicyParams& params, const TokenStream& prompt,
                             const SampleOptions& opts, const Injector& injector);

std::vector<double> next_token_distribution(const PolicyParams& params,
                                            const TokenStream& prefix);

// Per-policy-token log-probs of an existing rollout under other parameters.
std::vector<double> compute_logps(const PolicyParams& params, const RolloutRecord& rollout);

struct WeightedLogprob {
    double value = 0.0;
    std::vector<double> grad;
};

// value = sum_t mask_t * weights_t * log pi(o_t | prefix_t), with its exact
// parameter gradient. weights and mask align with policy_positions.
WeightedLogprob weighted_logprob_grad(const PolicyParams& params, const RolloutRecord& rollout,
                                      const std::vector<double>& weights,
                                      const std::vector<uint8_t>& mask);

}  // namespace framelab
