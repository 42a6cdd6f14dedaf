#include "framelab/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "framelab/rng.hpp"

namespace framelab {

namespace {

constexpr std::size_t kBagWindow = 12;
constexpr int kChannels = static_cast<int>(kPolicyGateCount);
constexpr double kSpanKernelWidth = 6.0;
constexpr double kFpsKernelWidth = 2.0;
constexpr double kEvidenceSlack = 0.75;
constexpr double kProgressScale = 256.0;
constexpr std::size_t kMaxParams = 100000;

constexpr int kScalarFeatures = 18;

std::size_t class_count() { return static_cast<std::size_t>(TokClass::Count); }

struct Layout {
    std::size_t F, H, V;
    std::size_t w1, b1, w2, b2, gates, total;
};

Layout layout_of(const ArchSpec& arch) {
    Layout l{};
    Vocab v(arch.vocab);
    l.V = static_cast<std::size_t>(v.size());
    l.H = static_cast<std::size_t>(arch.hidden);
    l.F = 2 * l.V + class_count() + kScalarFeatures;
    l.w1 = 0;
    l.b1 = l.w1 + l.F * l.H;
    l.w2 = l.b1 + l.H;
    l.b2 = l.w2 + l.V * l.H;
    l.gates = l.b2 + l.V;
    l.total = l.gates + kChannels;
    return l;
}

void validate_arch(const ArchSpec& arch) {
    if (arch.hidden < 1) throw std::invalid_argument("policy: hidden width must be positive");
    std::size_t total = layout_of(arch).total;
    if (total > kMaxParams)
        throw std::invalid_argument("policy: parameter count " + std::to_string(total) +
                                    " exceeds the " + std::to_string(kMaxParams) + " budget");
}

bool surface_is_number(const std::string& s) {
    bool digits = false;
    int dots = 0;
    for (char c : s) {
        if (c >= '0' && c <= '9')
            digits = true;
        else if (c == '.')
            ++dots;
        else
            return false;
    }
    return digits && dots <= 1;
}

}  // namespace

std::size_t feature_dim(const ArchSpec& arch) { return layout_of(arch).F; }
std::size_t param_count(const ArchSpec& arch) { return layout_of(arch).total; }

PolicyParams zero_params(const ArchSpec& arch) {
    validate_arch(arch);
    PolicyParams p;
    p.arch = arch;
    p.values.assign(param_count(arch), 0.0);
    return p;
}

PolicyParams init_params(const ArchSpec& arch, uint64_t seed, double scale) {
    PolicyParams p = zero_params(arch);
    Layout l = layout_of(arch);
    auto rng = make_rng(hash_combine(seed, "init"));
    std::uniform_real_distribution<double> u(-scale, scale);
    for (std::size_t i = l.w1; i < l.b1; ++i) p.values[i] = u(rng);
    for (std::size_t i = l.w2; i < l.b2; ++i) p.values[i] = u(rng);
    return p;
}

void save_checkpoint(const std::string& path, const PolicyParams& params) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "framelab-checkpoint v1\n";
    out << "max_seconds " << params.arch.vocab.max_seconds << "\n";
    out << "alphabet " << params.arch.vocab.alphabet << "\n";
    out << "hidden " << params.arch.hidden << "\n";
    out << "max_context " << params.arch.max_context << "\n";
    out << "count " << params.values.size() << "\n";
    char buf[40];
    for (double v : params.values) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf << "\n";
    }
}

PolicyParams load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read " + path);
    std::string header;
    std::getline(in, header);
    if (header != "framelab-checkpoint v1")
        throw std::runtime_error(path + ": not a framelab checkpoint");
    ArchSpec arch;
    std::size_t count = 0;
    std::string key;
    while (in >> key) {
        if (key == "max_seconds") in >> arch.vocab.max_seconds;
        else if (key == "alphabet") in >> arch.vocab.alphabet;
        else if (key == "hidden") in >> arch.hidden;
        else if (key == "max_context") in >> arch.max_context;
        else if (key == "count") { in >> count; break; }
        else throw std::runtime_error(path + ": unknown checkpoint field " + key);
    }
    PolicyParams p = zero_params(arch);
    if (count != p.values.size())
        throw std::runtime_error(path + ": checkpoint size does not match architecture");
    for (std::size_t i = 0; i < count; ++i) {
        if (!(in >> p.values[i])) throw std::runtime_error(path + ": truncated checkpoint");
    }
    return p;
}

std::size_t RolloutRecord::sampling_token_count() const {
    if (!stream.t_fps.has_value()) return 0;
    std::size_t n = 0;
    for (auto pos : policy_positions)
        if (pos <= *stream.t_fps) ++n;
    return n;
}

PolicyEvaluator::PolicyEvaluator(const PolicyParams& params)
    : params_(params), vocab_(params.arch.vocab) {
    validate_arch(params_.arch);
    if (params_.values.size() != param_count(params_.arch))
        throw std::invalid_argument("policy: parameter vector does not match architecture");
    Layout l = layout_of(params_.arch);
    dim_f_ = l.F;
    dim_h_ = l.H;
    dim_v_ = l.V;
    off_w1_ = l.w1;
    off_b1_ = l.b1;
    off_w2_ = l.w2;
    off_b2_ = l.b2;
    off_gates_ = l.gates;
    hidden_pre_.resize(l.H);
    hidden_.resize(l.H);
    logits_.resize(l.V);
    probs_.resize(l.V);
    channels_.resize(kChannels);
    choice_evidence_.assign(Vocab::letters().size(), 0.0);
    reset();
}

void PolicyEvaluator::reset() {
    recent_ids_.clear();
    prev_id_ = -1;
    prev_class_ = TokClass::Bos;
    policy_count_ = 0;
    context_len_ = 0;
    in_span_ = in_fps_ = in_answer_ = false;
    span_numerals_ = 0;
    answer_len_ = 0;
    in_think_ = think_done_ = false;
    own_span_start_ = own_span_end_ = -1.0;
    own_fps_ = 0;
    frames_expected_ = 0;
    frames_seen_ = 0;
    command_closed_ = false;
    is_mc_ = false;
    have_cue_ = false;
    cue_start_ = cue_end_ = 0.0;
    cue_state_ = 0;
    fps_cue_center_ = 0.0;
    prompt_duration_ = -1.0;
    expect_duration_ = false;
    choice_kinds_.clear();
    ground_kind_.clear();
    choice_state_ = -1;
    expect_ground_kind_ = false;
    last_timestamp_ = -1.0;
    std::fill(choice_evidence_.begin(), choice_evidence_.end(), 0.0);
    evidence_total_ = 0.0;
    ground_first_ = ground_last_ = -1.0;
    step_ready_ = false;
}

void PolicyEvaluator::push(const Token& t) {
    step_ready_ = false;
    const std::string& s = t.surface;
    const int id = vocab_.id_of(s);
    const TokClass cls = vocab_.class_of(t);
    const bool numberish = surface_is_number(s);

    if (s == "<think>") {
        in_think_ = true;
    } else if (s == "</think>") {
        in_think_ = false;
        think_done_ = true;
    } else if (s == "<span>") {
        in_span_ = true;
        span_numerals_ = 0;
    } else if (s == "</span>") {
        in_span_ = false;
    } else if (s == "<fps>") {
        in_fps_ = true;
    } else if (s == "</fps>") {
        in_fps_ = false;
        if (!command_closed_) {
            command_closed_ = true;
            double cs = std::max(0.0, own_span_start_);
            double ce = own_span_end_;
            if (prompt_duration_ > 0.0) ce = std::min(prompt_duration_, ce);
            if (own_span_start_ >= 0.0 && ce > cs && own_fps_ >= 1 && own_fps_ <= 6) {
                frames_expected_ =
                    std::max<long>(1, static_cast<long>(std::floor((ce - cs) * own_fps_ + 1e-9)));
            } else {
                frames_expected_ = 0;  // unusable command: nothing will arrive
            }
        }
    } else if (s == "<answer>") {
        in_answer_ = true;
        answer_len_ = 0;
    } else if (s == "</answer>") {
        in_answer_ = false;
    } else {
        if (in_span_ && numberish && span_numerals_ < 2) {
            if (span_numerals_ == 0)
                own_span_start_ = std::strtod(s.c_str(), nullptr);
            else
                own_span_end_ = std::strtod(s.c_str(), nullptr);
            ++span_numerals_;
        }
        if (in_fps_ && numberish) own_fps_ = static_cast<int>(std::strtod(s.c_str(), nullptr));
        if (in_answer_ && answer_len_ < 3) ++answer_len_;
    }

    if (t.origin == Origin::Prompt) {
        if (s == "between" || s == "around") {
            cue_state_ = 1;
        } else if (s == "duration") {
            expect_duration_ = true;
        } else if (numberish && expect_duration_) {
            prompt_duration_ = std::strtod(s.c_str(), nullptr);
            expect_duration_ = false;
        } else if (numberish && cue_state_ == 1) {
            cue_start_ = std::strtod(s.c_str(), nullptr);
            cue_state_ = 2;
        } else if (numberish && cue_state_ == 2) {
            cue_end_ = std::strtod(s.c_str(), nullptr);
            have_cue_ = true;
            cue_state_ = 0;
        } else if (s == "static") {
            fps_cue_center_ = 1.5;
        } else if (s == "moderate") {
            fps_cue_center_ = 3.5;
        } else if (s == "rapid") {
            fps_cue_center_ = 5.5;
        } else if (s == "choices") {
            is_mc_ = true;
            choice_state_ = 0;
        } else if (s == "locate") {
            expect_ground_kind_ = true;
        } else if (cls == TokClass::Kind) {
            if (expect_ground_kind_) {
                ground_kind_ = s;
                expect_ground_kind_ = false;
            } else if (choice_state_ >= 0 &&
                       choice_kinds_.size() < Vocab::letters().size()) {
                choice_kinds_.push_back(s);
            }
        }
    } else if (t.origin == Origin::Injected) {
        if (cls == TokClass::VisionEnd && command_closed_) ++frames_seen_;
        if (cls == TokClass::TimestampInjected) {
            last_timestamp_ = std::strtod(s.c_str(), nullptr);
        } else if (cls == TokClass::Kind && last_timestamp_ >= 0.0) {
            if (is_mc_ && have_cue_ && last_timestamp_ >= cue_start_ - kEvidenceSlack &&
                last_timestamp_ <= cue_end_ + kEvidenceSlack) {
                evidence_total_ += 1.0;
                for (std::size_t c = 0; c < choice_kinds_.size(); ++c)
                    if (choice_kinds_[c] == s) choice_evidence_[c] += 1.0;
            }
            if (!is_mc_ && s == ground_kind_) {
                if (ground_first_ < 0.0) ground_first_ = last_timestamp_;
                ground_last_ = std::max(ground_last_, last_timestamp_);
            }
        }
    } else {
        ++policy_count_;
    }

    prev_id_ = id;
    prev_class_ = cls;
    recent_ids_.push_back(id);
    if (recent_ids_.size() > kBagWindow) recent_ids_.erase(recent_ids_.begin());
    ++context_len_;
}

void PolicyEvaluator::ensure_step() {
    if (step_ready_) return;
    if (context_len_ > static_cast<std::size_t>(params_.arch.max_context))
        throw std::length_error("policy: prefix exceeds the maximum context length");

    const std::size_t V = dim_v_;

    feats_.clear();
    if (prev_id_ >= 0) feats_.emplace_back(prev_id_, 1.0);
    for (int id : recent_ids_)
        feats_.emplace_back(static_cast<int>(V) + id, 1.0 / kBagWindow);
    const int class_base = static_cast<int>(2 * V);
    feats_.emplace_back(class_base + static_cast<int>(prev_class_), 1.0);
    const int scalar_base = class_base + static_cast<int>(class_count());
    if (in_span_) feats_.emplace_back(scalar_base + std::min(span_numerals_, 2), 1.0);
    if (in_answer_) feats_.emplace_back(scalar_base + 3 + std::min(answer_len_, 3), 1.0);
    if (in_span_) feats_.emplace_back(scalar_base + 7, 1.0);
    if (in_fps_) feats_.emplace_back(scalar_base + 8, 1.0);
    if (in_answer_) feats_.emplace_back(scalar_base + 9, 1.0);
    if (is_mc_) feats_.emplace_back(scalar_base + 10, 1.0);
    if (prev_id_ < 0) feats_.emplace_back(scalar_base + 11, 1.0);
    feats_.emplace_back(scalar_base + 12, std::min(1.0, policy_count_ / kProgressScale));
    if (in_think_) feats_.emplace_back(scalar_base + 13, 1.0);
    if (think_done_) feats_.emplace_back(scalar_base + 14, 1.0);
    if (command_closed_) {
        bool done = frames_seen_ >= frames_expected_;
        feats_.emplace_back(scalar_base + (done ? 16 : 15), 1.0);
        double ratio = frames_expected_ > 0
                           ? std::min(1.0, static_cast<double>(frames_seen_) /
                                               static_cast<double>(frames_expected_))
                           : 1.0;
        feats_.emplace_back(scalar_base + 17, ratio);
    }

    for (auto& ch : channels_) ch.clear();
    auto span_kernel = [&](std::vector<std::pair<int, double>>& ch, double center) {
        int lo = std::max(0, static_cast<int>(std::ceil(center - kSpanKernelWidth)));
        int hi = std::min(vocab_.spec().max_seconds,
                          static_cast<int>(std::floor(center + kSpanKernelWidth)));
        for (int v = lo; v <= hi; ++v) {
            double val = 1.0 - std::abs(v - center) / kSpanKernelWidth;
            if (val > 0.0) ch.emplace_back(vocab_.numeral_begin() + v, val);
        }
    };
    if (in_span_ && span_numerals_ == 0 && prev_class_ == TokClass::SpanOpen && have_cue_)
        span_kernel(channels_[0], cue_start_);
    if (in_span_ && span_numerals_ == 1 && prev_class_ == TokClass::Dash && have_cue_)
        span_kernel(channels_[1], cue_end_);
    if (in_fps_ && prev_class_ == TokClass::FpsOpen && fps_cue_center_ > 0.0) {
        for (int f = 1; f <= 6; ++f) {
            double val = 1.0 - std::abs(f - fps_cue_center_) / kFpsKernelWidth;
            if (val > 0.0) channels_[2].emplace_back(vocab_.fps_id(f), val);
        }
    }
    if (in_answer_ && answer_len_ == 0 && prev_class_ == TokClass::AnswerOpen) {
        if (is_mc_) {
            double denom = std::max(1.0, evidence_total_);
            for (std::size_t c = 0; c < choice_kinds_.size(); ++c) {
                double val = choice_evidence_[c] / denom;
                if (val > 0.0)
                    channels_[3].emplace_back(vocab_.letter_id(static_cast<int>(c)), val);
            }
        } else {
            double center = ground_first_ >= 0.0 ? ground_first_ : (have_cue_ ? cue_start_ : -1.0);
            if (center >= 0.0) span_kernel(channels_[4], center);
        }
    }
    if (in_answer_ && !is_mc_ && prev_class_ == TokClass::Dash) {
        double center = ground_last_ >= 0.0 ? ground_last_ : (have_cue_ ? cue_end_ : -1.0);
        if (center >= 0.0) span_kernel(channels_[5], center);
    }

    const double* w = params_.values.data();
    const std::size_t H = dim_h_;
    for (std::size_t h = 0; h < H; ++h) hidden_pre_[h] = w[off_b1_ + h];
    for (const auto& [fid, val] : feats_) {
        const double* col = w + off_w1_ + static_cast<std::size_t>(fid) * H;
        for (std::size_t h = 0; h < H; ++h) hidden_pre_[h] += val * col[h];
    }
    for (std::size_t h = 0; h < H; ++h) hidden_[h] = std::tanh(hidden_pre_[h]);

    for (std::size_t v = 0; v < V; ++v) {
        const double* row = w + off_w2_ + v * H;
        double z = w[off_b2_ + v];
        for (std::size_t h = 0; h < H; ++h) z += row[h] * hidden_[h];
        logits_[v] = z;
    }
    for (int c = 0; c < kChannels; ++c) {
        double gate = w[off_gates_ + c];
        for (const auto& [vid, val] : channels_[c]) logits_[vid] += gate * val;
    }

    double m = logits_[0];
    for (double z : logits_) m = std::max(m, z);
    double sum = 0.0;
    for (std::size_t v = 0; v < V; ++v) sum += std::exp(logits_[v] - m);
    log_z_ = m + std::log(sum);
    for (std::size_t v = 0; v < V; ++v) probs_[v] = std::exp(logits_[v] - log_z_);
    step_ready_ = true;
}

const std::vector<double>& PolicyEvaluator::distribution() {
    ensure_step();
    return probs_;
}

double PolicyEvaluator::logp(int token_id) {
    ensure_step();
    return logits_[token_id] - log_z_;
}

double PolicyEvaluator::logp_with_grad(int token_id, double weight, std::vector<double>& grad) {
    ensure_step();
    const double* w = params_.values.data();
    double* g = grad.data();
    const std::size_t H = dim_h_;

    const double value = weight * (logits_[token_id] - log_z_);

    static thread_local std::vector<double> dh;
    dh.assign(H, 0.0);
    for (std::size_t v = 0; v < dim_v_; ++v) {
        double dz = weight * ((static_cast<int>(v) == token_id ? 1.0 : 0.0) - probs_[v]);
        g[off_b2_ + v] += dz;
        double* gw2 = g + off_w2_ + v * H;
        const double* w2 = w + off_w2_ + v * H;
        for (std::size_t h = 0; h < H; ++h) {
            gw2[h] += dz * hidden_[h];
            dh[h] += dz * w2[h];
        }
    }
    for (std::size_t h = 0; h < H; ++h) dh[h] *= 1.0 - hidden_[h] * hidden_[h];
    for (std::size_t h = 0; h < H; ++h) g[off_b1_ + h] += dh[h];
    for (const auto& [fid, val] : feats_) {
        double* gw1 = g + off_w1_ + static_cast<std::size_t>(fid) * H;
        for (std::size_t h = 0; h < H; ++h) gw1[h] += val * dh[h];
    }
    for (int c = 0; c < kChannels; ++c) {
        double acc = 0.0;
        for (const auto& [vid, val] : channels_[c]) {
            double dz = weight * ((vid == token_id ? 1.0 : 0.0) - probs_[vid]);
            acc += val * dz;
        }
        g[off_gates_ + c] += acc;
    }
    return value;
}

int PolicyEvaluator::sample(double temperature, double u01) {
    ensure_step();
    const std::size_t V = logits_.size();
    double m = logits_[0] / temperature;
    for (std::size_t v = 0; v < V; ++v) m = std::max(m, logits_[v] / temperature);
    double total = 0.0;
    for (std::size_t v = 0; v < V; ++v) total += std::exp(logits_[v] / temperature - m);
    double target = u01 * total;
    double cum = 0.0;
    for (std::size_t v = 0; v < V; ++v) {
        cum += std::exp(logits_[v] / temperature - m);
        if (cum >= target) return static_cast<int>(v);
    }
    return static_cast<int>(V) - 1;
}

RolloutRecord sample_rollout(const PolicyParams& params, const TokenStream& prompt,
                             const SampleOptions& opts, const Injector& injector) {
    if (!(opts.temperature > 0.0))
        throw std::invalid_argument("sample_rollout: temperature must be positive");
    RolloutRecord rec;
    rec.stream = prompt;
    rec.prompt_size = prompt.size();

    PolicyEvaluator ev(params);
    for (const auto& t : prompt.tokens) ev.push(t);

    auto rng = make_rng(hash_combine(opts.seed, "rollout"));
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    bool injection_attempted = false;
    bool closed = false;
    for (int step = 0; step < opts.max_new_tokens; ++step) {
        if (rec.stream.size() + 1 >= static_cast<std::size_t>(params.arch.max_context)) break;
        int id = ev.sample(opts.temperature, uni(rng));
        double lp = ev.logp(id);

        Token t;
        t.surface = ev.vocab().surface(id);
        t.origin = Origin::Policy;
        t.space_before = !rec.stream.tokens.empty();
        rec.policy_positions.push_back(rec.stream.size());
        rec.logp_current.push_back(lp);
        rec.stream.tokens.push_back(t);
        ev.push(t);

        if (t.surface == "</fps>" && !injection_attempted) {
            injection_attempted = true;
            assign_roles(rec.stream.tokens, rec.stream.t_fps);
            auto cmd = parse_retrieval_command(rec.stream);
            if (cmd.has_value()) {
                auto block = injector(*cmd);
                if (block.has_value()) {
                    for (auto& bt : *block) {
                        bt.space_before = true;
                        rec.stream.tokens.push_back(bt);
                        ev.push(bt);
                    }
                }
            }
        }
        if (t.surface == "</answer>") {
            closed = true;
            break;
        }
    }
    rec.truncated = !closed;
    assign_roles(rec.stream.tokens, rec.stream.t_fps);
    rec.logp_old = rec.logp_current;
    return rec;
}

std::vector<double> next_token_distribution(const PolicyParams& params,
                                            const TokenStream& prefix) {
    PolicyEvaluator ev(params);
    for (const auto& t : prefix.tokens) ev.push(t);
    return ev.distribution();
}

std::vector<double> compute_logps(const PolicyParams& params, const RolloutRecord& rollout) {
    PolicyEvaluator ev(params);
    std::vector<double> out;
    out.reserve(rollout.policy_positions.size());
    std::size_t next = 0;
    for (std::size_t i = 0; i < rollout.stream.size(); ++i) {
        if (next < rollout.policy_positions.size() && rollout.policy_positions[next] == i) {
            int id = ev.vocab().id_of(rollout.stream.tokens[i].surface);
            out.push_back(ev.logp(id));
            ++next;
        }
        ev.push(rollout.stream.tokens[i]);
    }
    return out;
}

WeightedLogprob weighted_logprob_grad(const PolicyParams& params, const RolloutRecord& rollout,
                                      const std::vector<double>& weights,
                                      const std::vector<uint8_t>& mask) {
    if (weights.size() != rollout.policy_positions.size() ||
        mask.size() != rollout.policy_positions.size())
        throw std::invalid_argument(
            "weighted_logprob_grad: weights/mask must align with policy tokens");
    WeightedLogprob out;
    out.grad.assign(param_count(params.arch), 0.0);
    PolicyEvaluator ev(params);
    std::size_t next = 0;
    for (std::size_t i = 0; i < rollout.stream.size(); ++i) {
        if (next < rollout.policy_positions.size() && rollout.policy_positions[next] == i) {
            if (mask[next] && weights[next] != 0.0) {
                int id = ev.vocab().id_of(rollout.stream.tokens[i].surface);
                out.value += ev.logp_with_grad(id, weights[next], out.grad);
            }
            ++next;
        }
        ev.push(rollout.stream.tokens[i]);
    }
    return out;
}

}  // namespace framelab
