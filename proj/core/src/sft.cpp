#include "framelab/sft.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "framelab/rng.hpp"

namespace framelab {

std::vector<uint8_t> sft_mask(const TokenStream& target, bool mask_all_video) {
    std::vector<uint8_t> mask(target.size(), 1);
    for (std::size_t i = 0; i < target.size(); ++i) {
        switch (target.tokens[i].role) {
            case Role::FrameContent:
                mask[i] = 0;
                break;
            case Role::Timestamp:
            case Role::VisionStart:
            case Role::VisionEnd:
                if (mask_all_video) mask[i] = 0;
                break;
            default:
                break;
        }
    }
    return mask;
}

namespace {

// Walks prompt then target, applying fn(position, token_id) at masked targets.
template <typename Fn>
std::size_t walk_masked(PolicyEvaluator& ev, const SftExample& ex,
                        const std::vector<uint8_t>& mask, Fn&& fn) {
    for (const auto& t : ex.prompt.tokens) ev.push(t);
    std::size_t count = 0;
    for (std::size_t i = 0; i < ex.target.size(); ++i) {
        const Token& t = ex.target.tokens[i];
        if (mask[i]) {
            fn(ev, ev.vocab().id_of(t.surface));
            ++count;
        }
        ev.push(t);
    }
    return count;
}

std::size_t mask_size(const std::vector<uint8_t>& mask) {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), uint8_t{1}));
}

}  // namespace

SftLoss sft_loss(const PolicyParams& params, const SftExample& example, bool mask_all_video) {
    auto mask = sft_mask(example.target, mask_all_video);
    std::size_t m = mask_size(mask);
    if (m == 0) throw std::invalid_argument("sft_loss: no unmasked target positions");

    SftLoss out;
    out.grad.assign(param_count(params.arch), 0.0);
    PolicyEvaluator ev(params);
    const double w = -1.0 / static_cast<double>(m);
    double value = 0.0;
    walk_masked(ev, example, mask, [&](PolicyEvaluator& e, int id) {
        value += e.logp_with_grad(id, w, out.grad);
    });
    out.loss = value;
    return out;
}

double sft_loss_value(const PolicyParams& params, const SftExample& example,
                      bool mask_all_video) {
    auto mask = sft_mask(example.target, mask_all_video);
    std::size_t m = mask_size(mask);
    if (m == 0) throw std::invalid_argument("sft_loss: no unmasked target positions");
    PolicyEvaluator ev(params);
    double sum = 0.0;
    walk_masked(ev, example, mask, [&](PolicyEvaluator& e, int id) { sum += e.logp(id); });
    return -sum / static_cast<double>(m);
}

SftResult run_sft(const PolicyParams& init, const std::vector<SftExample>& dataset,
                  const SftConfig& cfg) {
    if (dataset.empty()) throw std::invalid_argument("run_sft: empty dataset");
    SftResult res;
    res.params = init;
    auto rng = make_rng(hash_combine(cfg.seed, "sft"));

    const std::size_t n = dataset.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::size_t cursor = n;  // forces an initial shuffle

    std::vector<double> grad(res.params.values.size());
    std::vector<double> m1(res.params.values.size(), 0.0), m2(res.params.values.size(), 0.0);
    const std::size_t batch =
        cfg.batch_size <= 0 ? n : std::min<std::size_t>(cfg.batch_size, n);

    for (int step = 0; step < cfg.steps; ++step) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double batch_loss = 0.0;
        for (std::size_t b = 0; b < batch; ++b) {
            std::size_t idx;
            if (cfg.batch_size <= 0) {
                idx = b;
            } else {
                if (cursor >= n) {
                    std::shuffle(order.begin(), order.end(), rng);
                    cursor = 0;
                }
                idx = order[cursor++];
            }
            const SftExample& ex = dataset[idx];
            auto mask = sft_mask(ex.target, cfg.mask_all_video);
            std::size_t m = mask_size(mask);
            if (m == 0) throw std::invalid_argument("run_sft: example with empty loss mask");
            PolicyEvaluator ev(res.params);
            const double w = -1.0 / (static_cast<double>(m) * static_cast<double>(batch));
            double value = 0.0;
            walk_masked(ev, ex, mask, [&](PolicyEvaluator& e, int id) {
                value += e.logp_with_grad(id, w, grad);
            });
            batch_loss += value;
        }
        if (!std::isfinite(batch_loss))
            throw std::runtime_error("run_sft: non-finite loss at step " + std::to_string(step));
        if (cfg.adam) {
            const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
            const double bc1 = 1.0 - std::pow(b1, step + 1);
            const double bc2 = 1.0 - std::pow(b2, step + 1);
            const std::size_t gate_begin = grad.size() - kPolicyGateCount;
            for (std::size_t i = 0; i < grad.size(); ++i) {
                m1[i] = b1 * m1[i] + (1.0 - b1) * grad[i];
                m2[i] = b2 * m2[i] + (1.0 - b2) * grad[i] * grad[i];
                double step_val = (m1[i] / bc1) / (std::sqrt(m2[i] / bc2) + cfg.adam_eps);
                if (i < gate_begin) step_val += cfg.weight_decay * res.params.values[i];
                res.params.values[i] -= cfg.learning_rate * step_val;
            }
        } else {
            for (std::size_t i = 0; i < grad.size(); ++i)
                res.params.values[i] -= cfg.learning_rate * grad[i];
        }
        res.loss_curve.push_back(batch_loss);
    }
    return res;
}

void save_sft_dataset(const std::string& path, const std::vector<SftExample>& dataset) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& ex : dataset)
        out << serialize(ex.prompt) << "\t" << serialize(ex.target) << "\n";
}

std::vector<SftExample> load_sft_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read " + path);
    std::vector<SftExample> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error(path + ": malformed dataset line (missing tab)");
        SftExample ex;
        ex.prompt = parse(line.substr(0, tab), Origin::Prompt);
        ex.target = parse(line.substr(tab + 1), Origin::Policy);
        out.push_back(std::move(ex));
    }
    return out;
}

}  // namespace framelab
