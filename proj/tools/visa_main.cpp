#include <CLI11.hpp>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "visa/checkpoint.hpp"
#include "visa/config.hpp"
#include "visa/errors.hpp"
#include "visa/trainer.hpp"

namespace {

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(s);
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& s, const char* what) {
    std::vector<double> out;
    for (const std::string& item : split_csv(s)) {
        try {
            size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw visa::ConfigError(std::string(what) + ": '" + item + "' is not a number");
        }
    }
    if (out.empty()) throw visa::ConfigError(std::string(what) + ": empty list");
    return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
    std::vector<std::uint64_t> out;
    for (const std::string& item : split_csv(s)) {
        try {
            size_t pos = 0;
            out.push_back(std::stoull(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw visa::ConfigError("--seeds: '" + item + "' is not an integer");
        }
    }
    if (out.empty()) throw visa::ConfigError("--seeds: empty list");
    return out;
}

// Every config key becomes a --key override flag on commands that take a
// config file; flags win over file values.
void add_config_flags(CLI::App* cmd, std::map<std::string, std::string>& overrides) {
    for (const std::string& key : visa::config_keys()) {
        cmd->add_option_function<std::string>(
            "--" + key, [&overrides, key](const std::string& v) { overrides[key] = v; },
            "override config key '" + key + "'");
    }
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Goal-conditioned contrastive RL: training, evaluation and diagnostics"};
    app.require_subcommand(1);

    // train
    auto* train_cmd = app.add_subcommand("train", "Train from a config file");
    std::string train_config, train_out = "runs/train";
    std::map<std::string, std::string> train_overrides;
    train_cmd->add_option("--config", train_config, "key = value config file")->required();
    train_cmd->add_option("--out", train_out, "output directory");
    add_config_flags(train_cmd, train_overrides);
    train_cmd->callback([&] {
        visa::TrainConfig cfg = visa::load_config(train_config, train_overrides);
        visa::TrainResult r = visa::train(cfg, train_out);
        std::printf("metrics: %s\n", r.metrics_path.c_str());
        std::printf("checkpoint: %s\n", r.checkpoint_path.c_str());
        std::printf("final_success: %.6g\n", r.final_success);
        std::printf("best_success: %.6g\n", r.best_success);
    });

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
    std::string eval_ckpt, eval_env;
    int eval_episodes = 50;
    std::uint64_t eval_seed = 0;
    visa::EnvOptions eval_opt;
    eval_cmd->add_option("--checkpoint", eval_ckpt)->required();
    eval_cmd->add_option("--env", eval_env, "env tag")->required();
    eval_cmd->add_option("--episodes", eval_episodes)->required();
    eval_cmd->add_option("--seed", eval_seed)->required();
    eval_cmd->add_option("--episode-len", eval_opt.episode_len, "0 = env default");
    eval_cmd->add_option("--chain-n", eval_opt.chain_n);
    eval_cmd->add_option("--chain-p-forward", eval_opt.chain_p_forward);
    eval_cmd->callback([&] {
        visa::Checkpoint ck = visa::load_checkpoint(eval_ckpt);
        double rate = visa::evaluate(ck, eval_env, eval_episodes, eval_seed, eval_opt);
        std::printf("success_rate: %.6g\n", rate);
    });

    // ablate
    auto* abl_cmd = app.add_subcommand("ablate", "Run an ablation sweep");
    std::string abl_config, abl_variants, abl_seeds, abl_out = "runs/ablate";
    std::map<std::string, std::string> abl_overrides;
    abl_cmd->add_option("--config", abl_config, "base config file")->required();
    abl_cmd->add_option("--variants", abl_variants, "comma list of methods/aug tags")->required();
    abl_cmd->add_option("--seeds", abl_seeds, "comma list of seeds")->required();
    abl_cmd->add_option("--out", abl_out, "output directory");
    add_config_flags(abl_cmd, abl_overrides);
    abl_cmd->callback([&] {
        visa::TrainConfig base = visa::load_config(abl_config, abl_overrides);
        std::string path = visa::run_ablation(base, split_csv(abl_variants),
                                              parse_seed_list(abl_seeds), abl_out);
        std::printf("summary: %s\n", path.c_str());
    });

    // mi-bench
    auto* mi_cmd = app.add_subcommand("mi-bench", "Mutual-information estimator benchmark");
    std::string mi_rho, mi_out = "mi_bench.csv";
    int mi_batch = 256, mi_steps = 2000;
    std::uint64_t mi_seed = 0;
    mi_cmd->add_option("--rho", mi_rho, "comma list of correlations")->required();
    mi_cmd->add_option("--batch", mi_batch);
    mi_cmd->add_option("--steps", mi_steps);
    mi_cmd->add_option("--seed", mi_seed);
    mi_cmd->add_option("--out", mi_out);
    mi_cmd->callback([&] {
        visa::mi_bench(parse_double_list(mi_rho, "--rho"), mi_batch, mi_steps, mi_seed, mi_out);
        std::printf("benchmark: %s\n", mi_out.c_str());
    });

    // dump-embeddings
    auto* dump_cmd = app.add_subcommand("dump-embeddings", "Write rollout embeddings to CSV");
    std::string dump_ckpt, dump_env, dump_out = "embeddings.csv";
    int dump_rollouts = 2;
    std::uint64_t dump_seed = 0;
    visa::EnvOptions dump_opt;
    dump_cmd->add_option("--checkpoint", dump_ckpt)->required();
    dump_cmd->add_option("--env", dump_env, "env tag")->required();
    dump_cmd->add_option("--rollouts", dump_rollouts)->required();
    dump_cmd->add_option("--out", dump_out)->required();
    dump_cmd->add_option("--seed", dump_seed);
    dump_cmd->add_option("--episode-len", dump_opt.episode_len, "0 = env default");
    dump_cmd->add_option("--chain-n", dump_opt.chain_n);
    dump_cmd->add_option("--chain-p-forward", dump_opt.chain_p_forward);
    dump_cmd->callback([&] {
        visa::Checkpoint ck = visa::load_checkpoint(dump_ckpt);
        visa::dump_embeddings(ck, dump_env, dump_rollouts, dump_seed, dump_out, dump_opt);
        std::printf("embeddings: %s\n", dump_out.c_str());
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // help/version exit 0, usage errors are config errors
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const visa::NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const visa::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const visa::InputError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
