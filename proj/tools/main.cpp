// framelab command line: dataset curation, supervised and RL training,
// evaluation, gradient checking, context accounting, and run reports.
//
// Exit codes: 0 success, 1 configuration error, 2 aborted run (non-finite
// loss or broken run state), 3 gradient check failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "framelab/config.hpp"
#include "framelab/context_cost.hpp"
#include "framelab/curator.hpp"
#include "framelab/gradcheck.hpp"
#include "framelab/grpo.hpp"
#include "framelab/harness.hpp"
#include "framelab/policy.hpp"
#include "framelab/rng.hpp"
#include "framelab/sft.hpp"
#include "framelab/world.hpp"

namespace fl = framelab;
namespace fs = std::filesystem;

namespace {

struct CommonArgs {
    std::string config_file;
    std::vector<std::string> sets;
    std::string out_dir;
    std::optional<uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_out = true) {
    cmd->add_option("--config", args.config_file, "key=value configuration file");
    cmd->add_option("--set", args.sets, "override a configuration key (key=value)")
        ->take_all();
    auto* out = cmd->add_option("--out", args.out_dir, "run directory for artifacts");
    if (needs_out) out->required();
    cmd->add_option("--seed", args.seed, "override the global seed");
}

fl::KeyValueConfig resolve(const CommonArgs& args) {
    fl::KeyValueConfig cfg;
    if (!args.config_file.empty()) cfg = fl::KeyValueConfig::from_file(args.config_file);
    for (const auto& s : args.sets) {
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--set expects key=value, got '" + s + "'");
        cfg.set(s.substr(0, eq), s.substr(eq + 1));
    }
    if (args.seed.has_value()) cfg.set("seed", std::to_string(*args.seed));
    return cfg;
}

const std::vector<std::string> kWorldKeys = {
    "world.duration_min", "world.duration_max", "world.alphabet", "world.distractors",
    "world.n_choices", "world.p_static", "world.p_moderate", "world.mc_fraction",
    "world.initial_fps", "world.initial_budget", "world.retrieval_budget",
    "world.hint_margin", "world.max_seconds",
};
const std::vector<std::string> kRewardKeys = {
    "reward.lambda1", "reward.lambda2", "reward.f_max", "reward.ans_weight",
    "reward.format_weight",
};
const std::vector<std::string> kPolicyKeys = {"policy.hidden", "policy.max_context",
                                              "policy.init_scale"};

fl::WorldConfig world_from(const fl::KeyValueConfig& cfg) {
    fl::WorldConfig w;
    w.duration_min = cfg.get_double("world.duration_min", w.duration_min);
    w.duration_max = cfg.get_double("world.duration_max", w.duration_max);
    w.alphabet = cfg.get_int("world.alphabet", w.alphabet);
    w.distractors = cfg.get_int("world.distractors", w.distractors);
    w.n_choices = cfg.get_int("world.n_choices", w.n_choices);
    w.p_static = cfg.get_double("world.p_static", w.p_static);
    w.p_moderate = cfg.get_double("world.p_moderate", w.p_moderate);
    w.question_mc_fraction = cfg.get_double("world.mc_fraction", w.question_mc_fraction);
    w.initial_fps = cfg.get_double("world.initial_fps", w.initial_fps);
    w.initial_budget = cfg.get_int("world.initial_budget", w.initial_budget);
    w.retrieval_budget = cfg.get_int("world.retrieval_budget", w.retrieval_budget);
    w.grounding_hint_margin = cfg.get_double("world.hint_margin", w.grounding_hint_margin);
    w.max_seconds = cfg.get_int("world.max_seconds", w.max_seconds);
    return w;
}

fl::RewardWeights rewards_from(const fl::KeyValueConfig& cfg) {
    fl::RewardWeights w;
    w.lambda1 = cfg.get_double("reward.lambda1", w.lambda1);
    w.lambda2 = cfg.get_double("reward.lambda2", w.lambda2);
    w.f_max = cfg.get_double("reward.f_max", w.f_max);
    w.ans_weight = cfg.get_double("reward.ans_weight", w.ans_weight);
    w.format_weight = cfg.get_double("reward.format_weight", w.format_weight);
    if (std::abs(w.lambda1 + w.lambda2 - 1.0) > 1e-12)
        throw std::invalid_argument("reward weights: lambda1 + lambda2 must equal 1");
    if (!(w.f_max > 0.0)) throw std::invalid_argument("reward weights: f_max must be positive");
    return w;
}

fl::ArchSpec arch_from(const fl::KeyValueConfig& cfg, const fl::WorldConfig& world) {
    fl::ArchSpec arch;
    arch.vocab.max_seconds = world.max_seconds;
    arch.vocab.alphabet = world.alphabet;
    arch.hidden = cfg.get_int("policy.hidden", arch.hidden);
    arch.max_context = cfg.get_int("policy.max_context", arch.max_context);
    return arch;
}

void check_known(const fl::KeyValueConfig& cfg, std::vector<std::string> known) {
    known.push_back("seed");
    auto unknown = cfg.unknown_keys(known);
    // protocol.* keys are command-specific and validated by the account command.
    unknown.erase(std::remove_if(unknown.begin(), unknown.end(),
                                 [](const std::string& k) { return k.rfind("protocol.", 0) == 0; }),
                  unknown.end());
    if (!unknown.empty()) {
        std::string msg = "unknown configuration keys:";
        for (const auto& k : unknown) msg += " " + k;
        throw std::invalid_argument(msg);
    }
}

std::vector<std::string> concat(std::initializer_list<std::vector<std::string>> lists) {
    std::vector<std::string> out;
    for (const auto& l : lists) out.insert(out.end(), l.begin(), l.end());
    return out;
}

std::string reward_csv_row(uint64_t task_seed, const fl::RewardBreakdown& r, bool format_valid) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%llu,%.17g,%.17g,%.17g,%.17g,%.17g,%d",
                  static_cast<unsigned long long>(task_seed), r.r_samp, r.r_ans, r.r_format,
                  r.iou, r.fps_term, format_valid ? 1 : 0);
    return buf;
}

// ---------------------------------------------------------------------------

int cmd_curate(const CommonArgs& args) {
    auto cfg = resolve(args);
    check_known(cfg, concat({kWorldKeys,
                             {"curator.pool_tg", "curator.pool_vqa", "curator.pool_gvqa",
                              "curator.total", "curator.ratio_tg", "curator.ratio_vqa",
                              "curator.ratio_gvqa", "curator.consistency_iou",
                              "curator.rl_tasks"}}));
    uint64_t seed = cfg.get_u64("seed", 0);
    fl::WorldConfig world = world_from(cfg);

    fl::CuratorConfig cur;
    cur.pool_temporal_grounding = cfg.get_int("curator.pool_tg", cur.pool_temporal_grounding);
    cur.pool_videoqa = cfg.get_int("curator.pool_vqa", cur.pool_videoqa);
    cur.pool_grounded_vqa = cfg.get_int("curator.pool_gvqa", cur.pool_grounded_vqa);
    cur.total = cfg.get_int("curator.total", cur.total);
    cur.ratios = {cfg.get_double("curator.ratio_tg", 0.30),
                  cfg.get_double("curator.ratio_vqa", 0.45),
                  cfg.get_double("curator.ratio_gvqa", 0.25)};
    cur.consistency_iou = cfg.get_double("curator.consistency_iou", cur.consistency_iou);
    cur.seed = seed;

    fl::OracleTeacher teacher(seed, world);
    fl::CurationResult result = fl::curate(teacher, world, cur);

    fs::create_directories(args.out_dir);
    std::vector<fl::SftExample> examples;
    for (const auto& rec : result.dataset)
        examples.push_back(fl::record_to_example(rec, world));
    fl::save_sft_dataset(args.out_dir + "/sft_train.tsv", examples);

    int rl_count = cfg.get_int("curator.rl_tasks", 500);
    std::vector<fl::Task> rl_tasks;
    for (const auto& rec : result.dataset) {
        rl_tasks.push_back(rec.task);
        if (static_cast<int>(rl_tasks.size()) >= rl_count) break;
    }
    fl::save_tasks(args.out_dir + "/rl_tasks.jsonl", rl_tasks);

    std::ostringstream log;
    log << "source,task_seed,stage,reason\n";
    for (const auto& d : result.drops)
        log << fl::source_name(d.source) << "," << d.task_seed << "," << d.stage << ","
            << d.reason << "\n";
    fl::write_text_file(args.out_dir + "/curation_log.csv", log.str());

    fl::write_manifest(args.out_dir, "curate", cfg);
    std::cout << "curate: raw=" << result.raw_count << " dropped=" << result.drops.size()
              << " dataset=" << result.dataset.size() << " rl_tasks=" << rl_tasks.size()
              << "\n";
    return 0;
}

int cmd_train_sft(const CommonArgs& args) {
    auto cfg = resolve(args);
    check_known(cfg, concat({kWorldKeys, kPolicyKeys,
                             {"data", "sft.lr", "sft.steps", "sft.batch",
                              "sft.mask_all_video"}}));
    uint64_t seed = cfg.get_u64("seed", 0);
    fl::WorldConfig world = world_from(cfg);
    std::string data = cfg.get_string("data", "");
    if (data.empty()) throw std::invalid_argument("train-sft: 'data' (dataset path) is required");

    auto dataset = fl::load_sft_dataset(data);
    fl::ArchSpec arch = arch_from(cfg, world);
    fl::PolicyParams init =
        fl::init_params(arch, seed, cfg.get_double("policy.init_scale", 0.05));

    fl::SftConfig sft;
    sft.learning_rate = cfg.get_double("sft.lr", sft.learning_rate);
    sft.steps = cfg.get_int("sft.steps", sft.steps);
    sft.batch_size = cfg.get_int("sft.batch", sft.batch_size);
    sft.mask_all_video = cfg.get_bool("sft.mask_all_video", sft.mask_all_video);
    sft.seed = seed;

    fl::SftResult result = fl::run_sft(init, dataset, sft);

    fs::create_directories(args.out_dir);
    fl::save_checkpoint(args.out_dir + "/checkpoint.txt", result.params);
    std::ostringstream curve;
    curve << "step,loss\n";
    char buf[64];
    for (std::size_t i = 0; i < result.loss_curve.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i, result.loss_curve[i]);
        curve << buf;
    }
    fl::write_text_file(args.out_dir + "/sft_loss.csv", curve.str());
    fl::write_manifest(args.out_dir, "train-sft", cfg);
    std::cout << "train-sft: steps=" << sft.steps << " final_loss="
              << (result.loss_curve.empty() ? 0.0 : result.loss_curve.back()) << "\n";
    return 0;
}

fl::RLConfig rl_from(const fl::KeyValueConfig& cfg) {
    fl::RLConfig rl;
    rl.group_size = cfg.get_int("rl.group_size", rl.group_size);
    rl.clip_eps = cfg.get_double("rl.clip_eps", rl.clip_eps);
    rl.kl_beta = cfg.get_double("rl.kl_beta", rl.kl_beta);
    rl.norm_eps = cfg.get_double("rl.norm_eps", rl.norm_eps);
    rl.learning_rate = cfg.get_double("rl.lr", rl.learning_rate);
    rl.steps = cfg.get_int("rl.steps", rl.steps);
    rl.tasks_per_step = cfg.get_int("rl.tasks_per_step", rl.tasks_per_step);
    rl.temperature = cfg.get_double("rl.temperature", rl.temperature);
    rl.max_new_tokens = cfg.get_int("rl.max_new", rl.max_new_tokens);
    rl.seed = cfg.get_u64("seed", 0);
    rl.variant = cfg.get_string("rl.variant", rl.variant);
    int fixed = cfg.get_int("rl.fixed_fps", 0);
    if (fixed > 0) rl.fixed_fps = fixed;
    rl.rewards = rewards_from(cfg);
    rl.validate();
    return rl;
}

const std::vector<std::string> kRlKeys = {
    "init", "ref", "tasks", "rl.group_size", "rl.clip_eps", "rl.kl_beta", "rl.norm_eps",
    "rl.lr", "rl.steps", "rl.tasks_per_step", "rl.temperature", "rl.max_new", "rl.variant",
    "rl.fixed_fps",
};

int cmd_train_rl(const CommonArgs& args) {
    auto cfg = resolve(args);
    check_known(cfg, concat({kWorldKeys, kRewardKeys, kRlKeys}));
    std::string init_path = cfg.get_string("init", "");
    if (init_path.empty())
        throw std::invalid_argument("train-rl: 'init' (checkpoint path) is required");
    fl::WorldConfig world = world_from(cfg);
    fl::RLConfig rl = rl_from(cfg);

    fl::PolicyParams init = fl::load_checkpoint(init_path);
    fl::PolicyParams ref =
        cfg.has("ref") ? fl::load_checkpoint(cfg.get_string("ref", "")) : init;

    std::vector<fl::Task> dataset;
    const std::vector<fl::Task>* dataset_ptr = nullptr;
    if (cfg.has("tasks")) {
        dataset = fl::load_tasks(cfg.get_string("tasks", ""));
        dataset_ptr = &dataset;
    }

    fl::RLResult result = fl::train_rl(init, ref, world, rl, dataset_ptr);

    fs::create_directories(args.out_dir);
    std::ostringstream metrics;
    metrics << fl::kMetricsHeader << "\n";
    for (const auto& m : result.metrics) metrics << fl::metrics_csv_row(m) << "\n";
    fl::write_text_file(args.out_dir + "/metrics.csv", metrics.str());
    fl::save_checkpoint(args.out_dir + "/checkpoint.txt", result.params);
    fl::write_manifest(args.out_dir, "train-rl", cfg);
    if (!result.metrics.empty()) {
        const auto& last = result.metrics.back();
        std::cout << "train-rl: variant=" << rl.variant << " steps=" << rl.steps
                  << " final mean_r_samp=" << last.mean_r_samp
                  << " mean_r_ans=" << last.mean_r_ans << "\n";
    }
    return 0;
}

int cmd_eval(const CommonArgs& args) {
    auto cfg = resolve(args);
    check_known(cfg, concat({kWorldKeys, kRewardKeys,
                             {"init", "tasks", "eval.n_tasks", "eval.temperature",
                              "eval.max_new", "eval.fixed_fps", "eval.dump"}}));
    std::string init_path = cfg.get_string("init", "");
    if (init_path.empty()) throw std::invalid_argument("eval: 'init' (checkpoint) is required");
    fl::WorldConfig world = world_from(cfg);
    fl::RewardWeights weights = rewards_from(cfg);
    uint64_t seed = cfg.get_u64("seed", 0);

    fl::PolicyParams params = fl::load_checkpoint(init_path);
    std::vector<fl::Task> tasks;
    if (cfg.has("tasks")) {
        tasks = fl::load_tasks(cfg.get_string("tasks", ""));
    } else {
        tasks = fl::make_task_block(seed, "eval-tasks", cfg.get_int("eval.n_tasks", 160), world);
    }
    std::optional<int> fixed;
    int f = cfg.get_int("eval.fixed_fps", 0);
    if (f > 0) fixed = f;

    fl::EvalSummary summary =
        fl::evaluate_policy(params, tasks, world, weights, cfg.get_double("eval.temperature", 1.0),
                            seed, fixed, cfg.get_int("eval.max_new", 256));

    fs::create_directories(args.out_dir);
    std::ostringstream rows;
    rows << "task_seed,r_samp,r_ans,r_format,iou,fps_term,format_valid\n";
    for (const auto& row : summary.rows)
        rows << reward_csv_row(row.task_seed, row.reward, row.format_valid) << "\n";
    fl::write_text_file(args.out_dir + "/eval_scores.csv", rows.str());

    if (cfg.get_bool("eval.dump", false)) {
        std::ostringstream dump;
        for (const auto& row : summary.rows) dump << row.completion << "\n";
        fl::write_text_file(args.out_dir + "/rollouts.txt", dump.str());
    }

    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "tasks %zu\nmean_r_samp %.6f\nmean_r_ans %.6f\nmean_r_format %.6f\n"
                  "format_rate %.6f\naccuracy %.6f\n",
                  summary.rows.size(), summary.mean_r_samp, summary.mean_r_ans,
                  summary.mean_r_format, summary.format_rate, summary.accuracy);
    fl::write_text_file(args.out_dir + "/eval_summary.txt", buf);
    fl::write_manifest(args.out_dir, "eval", cfg);
    std::cout << buf;
    return 0;
}

int cmd_gradcheck(const CommonArgs& args) {
    auto cfg = resolve(args);
    check_known(cfg, {"gradcheck.seeds", "gradcheck.tolerance"});
    fl::GradCheckReport rep =
        fl::run_gradcheck(cfg.get_u64("seed", 0), cfg.get_int("gradcheck.seeds", 5),
                          cfg.get_double("gradcheck.tolerance", 1e-4));
    if (!args.out_dir.empty()) {
        fs::create_directories(args.out_dir);
        fl::write_text_file(args.out_dir + "/gradcheck.txt", rep.to_text());
        fl::write_manifest(args.out_dir, "gradcheck", cfg);
    }
    std::cout << rep.to_text();
    return rep.pass ? 0 : 3;
}

int cmd_account(const CommonArgs& args) {
    auto cfg = resolve(args);
    check_known(cfg, {"cost.grid_h", "cost.grid_w", "cost.merge", "cost.timestamp_tokens",
                      "cost.boundary_tokens"});
    fl::CostModel model;
    model.grid_h = cfg.get_int("cost.grid_h", model.grid_h);
    model.grid_w = cfg.get_int("cost.grid_w", model.grid_w);
    model.merge = cfg.get_int("cost.merge", model.merge);
    model.timestamp_tokens = cfg.get_int("cost.timestamp_tokens", model.timestamp_tokens);
    model.boundary_tokens = cfg.get_int("cost.boundary_tokens", model.boundary_tokens);

    // protocol.<name>.{rounds,frames_per_round,initial_frames,text_tokens}
    std::map<std::string, fl::ProtocolDescriptor> protocols;
    for (const auto& [key, value] : cfg.entries()) {
        if (key.rfind("protocol.", 0) != 0) continue;
        auto rest = key.substr(9);
        auto dot = rest.find('.');
        if (dot == std::string::npos)
            throw std::invalid_argument("account: malformed protocol key " + key);
        std::string name = rest.substr(0, dot);
        std::string field = rest.substr(dot + 1);
        auto& p = protocols[name];
        p.name = name;
        if (field == "rounds") p.rounds = cfg.get_int(key, 0);
        else if (field == "frames_per_round") p.frames_per_round = cfg.get_int(key, 0);
        else if (field == "initial_frames") p.initial_frames = cfg.get_int(key, 0);
        else if (field == "text_tokens") p.text_tokens = cfg.get_int(key, 0);
        else throw std::invalid_argument("account: unknown protocol field " + key);
    }
    if (protocols.empty()) {
        // Single-injection versus multi-round revisiting at an equal per-call budget.
        protocols["single_injection"] = {"single_injection", 1, 64, 120, 400};
        protocols["four_round"] = {"four_round", 4, 64, 120, 400};
        protocols["text_only"] = {"text_only", 0, 0, 0, 400};
    }
    std::vector<fl::ProtocolDescriptor> list;
    for (auto& [name, p] : protocols) list.push_back(p);
    auto report = fl::compare_protocols(list, model);
    std::string csv = fl::protocol_report_csv(report);
    if (!args.out_dir.empty()) {
        fs::create_directories(args.out_dir);
        fl::write_text_file(args.out_dir + "/context_report.csv", csv);
        fl::write_manifest(args.out_dir, "account", cfg);
    }
    std::cout << "frame_token_cost " << fl::frame_token_cost(model) << "\n" << csv;
    return 0;
}

int cmd_stats(const CommonArgs& args) {
    auto cfg = resolve(args);
    check_known(cfg, {"rollouts", "stats.bin_seconds"});
    std::string path = cfg.get_string("rollouts", "");
    if (path.empty()) throw std::invalid_argument("stats: 'rollouts' (dump path) is required");
    double bin = cfg.get_double("stats.bin_seconds", 2.0);
    if (!(bin > 0.0)) throw std::invalid_argument("stats: bin_seconds must be positive");

    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read " + path);
    std::map<int, int> span_hist;
    std::vector<int> fps_hist(7, 0);
    int with_command = 0, total = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++total;
        auto cmd = fl::parse_retrieval_command(fl::parse(line));
        if (!cmd.has_value()) continue;
        ++with_command;
        double len = cmd->t_e - cmd->t_s;
        if (len > 0.0) span_hist[static_cast<int>(len / bin)] += 1;
        if (cmd->f >= 1 && cmd->f <= 6) fps_hist[cmd->f] += 1;
    }

    std::ostringstream spans;
    spans << "span_bin_start,span_bin_end,count\n";
    for (const auto& [b, count] : span_hist)
        spans << b * bin << "," << (b + 1) * bin << "," << count << "\n";
    std::ostringstream fps;
    fps << "fps,count\n";
    for (int f = 1; f <= 6; ++f) fps << f << "," << fps_hist[f] << "\n";

    fs::create_directories(args.out_dir);
    fl::write_text_file(args.out_dir + "/span_hist.csv", spans.str());
    fl::write_text_file(args.out_dir + "/fps_hist.csv", fps.str());
    fl::write_manifest(args.out_dir, "stats", cfg);
    std::cout << "stats: rollouts=" << total << " with_command=" << with_command << "\n"
              << fps.str();
    return 0;
}

int cmd_report(const std::string& run_dir) {
    if (!fl::has_manifest(run_dir))
        throw std::invalid_argument("report: no manifest in " + run_dir);
    auto manifest = fl::read_manifest(run_dir);
    std::cout << "run " << run_dir << "\n";
    std::cout << "  command: " << manifest.get_string("command", "?") << "\n";
    std::cout << "  code: " << manifest.get_string("code_version", "?") << "\n";
    std::cout << "  seed: " << manifest.get_string("seed", "0") << "\n";

    std::string metrics_path = run_dir + "/metrics.csv";
    if (fs::exists(metrics_path)) {
        std::ifstream in(metrics_path);
        std::string line, last;
        std::getline(in, line);  // header
        while (std::getline(in, line))
            if (!line.empty()) last = line;
        if (!last.empty())
            std::cout << "  final metrics (" << fl::kMetricsHeader << "):\n    " << last << "\n";
    }
    std::string summary_path = run_dir + "/eval_summary.txt";
    if (fs::exists(summary_path)) {
        std::cout << "  eval summary:\n";
        std::istringstream ss(fl::read_text_file(summary_path));
        std::string line;
        while (std::getline(ss, line)) std::cout << "    " << line << "\n";
    }
    std::cout << "  files:\n";
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(run_dir))
        names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    for (const auto& n : names) std::cout << "    " << n << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"framelab: a desk-scale lab for span/fps retrieval policies"};
    app.require_subcommand(1);

    CommonArgs curate_args, sft_args, rl_args, eval_args, grad_args, account_args, stats_args;
    std::string report_dir;

    auto* c_curate = app.add_subcommand("curate", "build SFT and RL dataset files");
    add_common(c_curate, curate_args);
    auto* c_sft = app.add_subcommand("train-sft", "cold-start supervised training");
    add_common(c_sft, sft_args);
    auto* c_rl = app.add_subcommand("train-rl", "group-relative RL training");
    add_common(c_rl, rl_args);
    std::string variant_flag;
    int fixed_fps_flag = 0;
    c_rl->add_option("--variant", variant_flag, "sd or vanilla");
    c_rl->add_option("--fixed-fps", fixed_fps_flag, "force the injection density");
    auto* c_eval = app.add_subcommand("eval", "score a checkpoint on held-out tasks");
    add_common(c_eval, eval_args);
    auto* c_grad = app.add_subcommand("gradcheck", "finite-difference gradient check");
    add_common(c_grad, grad_args, false);
    auto* c_account = app.add_subcommand("account", "context-length accounting report");
    add_common(c_account, account_args, false);
    auto* c_stats = app.add_subcommand("stats", "span/fps histograms from a rollout dump");
    add_common(c_stats, stats_args);
    auto* c_report = app.add_subcommand("report", "summarize a finished run directory");
    c_report->add_option("run_dir", report_dir, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (c_curate->parsed()) return cmd_curate(curate_args);
        if (c_sft->parsed()) return cmd_train_sft(sft_args);
        if (c_rl->parsed()) {
            if (!variant_flag.empty()) rl_args.sets.push_back("rl.variant=" + variant_flag);
            if (fixed_fps_flag > 0)
                rl_args.sets.push_back("rl.fixed_fps=" + std::to_string(fixed_fps_flag));
            return cmd_train_rl(rl_args);
        }
        if (c_eval->parsed()) return cmd_eval(eval_args);
        if (c_grad->parsed()) return cmd_gradcheck(grad_args);
        if (c_account->parsed()) return cmd_account(account_args);
        if (c_stats->parsed()) return cmd_stats(stats_args);
        if (c_report->parsed()) return cmd_report(report_dir);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "run aborted: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
