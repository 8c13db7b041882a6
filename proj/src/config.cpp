#include "visa/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>

#include "visa/env.hpp"
#include "visa/errors.hpp"

namespace visa {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
    }
}

long parse_long(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        long n = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return n;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
    }
}

int parse_int(const std::string& key, const std::string& v) {
    long n = parse_long(key, v);
    if (n < std::numeric_limits<int>::min() || n > std::numeric_limits<int>::max()) {
        throw ConfigError("config key '" + key + "': value out of int range");
    }
    return static_cast<int>(n);
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError("config key '" + key + "': empty list element");
        out.push_back(parse_int(key, item));
    }
    if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
    return out;
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "env",          "method",          "aug",           "gamma",
        "gamma_aug",    "safe_convention", "lambda_club",   "batch",
        "embed_dim",    "hidden",          "lr_critic",     "lr_actor",
        "alpha",        "total_env_steps", "updates_per_step", "eval_every",
        "eval_episodes", "buffer_capacity", "seed",          "warmup_steps",
        "bo_detach_base", "logit_penalty",  "critic_only",   "episode_len",
        "chain_n",      "chain_p_forward",
    };
    return keys;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        const auto& keys = config_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown config key '" +
                              key + "'");
        }
        if (kv.count(key)) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
        kv[key] = val;
    }
    return kv;
}

void apply_config(TrainConfig& cfg, const std::map<std::string, std::string>& kv) {
    const auto& keys = config_keys();
    for (const auto& [key, val] : kv) {
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw ConfigError("unknown config key '" + key + "'");
        }
        try {
            if (key == "env") cfg.env = val;
            else if (key == "method") cfg.method = parse_method(val);
            else if (key == "aug") cfg.aug = parse_aug_tag(val);
            else if (key == "gamma") cfg.gamma = parse_double(key, val);
            else if (key == "gamma_aug") cfg.gamma_aug = parse_double(key, val);
            else if (key == "safe_convention") cfg.safe_convention = parse_safe_convention(val);
            else if (key == "lambda_club") cfg.lambda_club = parse_double(key, val);
            else if (key == "batch") cfg.batch = parse_int(key, val);
            else if (key == "embed_dim") cfg.embed_dim = parse_int(key, val);
            else if (key == "hidden") cfg.hidden = parse_int_list(key, val);
            else if (key == "lr_critic") cfg.lr_critic = parse_double(key, val);
            else if (key == "lr_actor") cfg.lr_actor = parse_double(key, val);
            else if (key == "alpha") cfg.alpha = parse_double(key, val);
            else if (key == "total_env_steps") cfg.total_env_steps = parse_long(key, val);
            else if (key == "updates_per_step") cfg.updates_per_step = parse_int(key, val);
            else if (key == "eval_every") cfg.eval_every = parse_long(key, val);
            else if (key == "eval_episodes") cfg.eval_episodes = parse_int(key, val);
            else if (key == "buffer_capacity") cfg.buffer_capacity = parse_int(key, val);
            else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_long(key, val));
            else if (key == "warmup_steps") cfg.warmup_steps = parse_long(key, val);
            else if (key == "bo_detach_base") cfg.bo_detach_base = parse_bool(key, val);
            else if (key == "logit_penalty") cfg.logit_penalty = parse_double(key, val);
            else if (key == "critic_only") cfg.critic_only = parse_bool(key, val);
            else if (key == "episode_len") cfg.episode_len = parse_int(key, val);
            else if (key == "chain_n") cfg.chain_n = parse_int(key, val);
            else if (key == "chain_p_forward") cfg.chain_p_forward = parse_double(key, val);
        } catch (const InputError& e) {
            // parse_method / parse_aug_tag / parse_safe_convention reject here
            throw ConfigError("config key '" + key + "': " + e.what());
        }
    }
}

void validate_config(const TrainConfig& cfg) {
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    require(cfg.gamma > 0.0 && cfg.gamma < 1.0, "gamma must be in (0, 1)");
    require(cfg.gamma_aug > 0.0 && cfg.gamma_aug < 1.0, "gamma_aug must be in (0, 1)");
    require(cfg.lambda_club >= 0.0 && cfg.lambda_club <= 1.0, "lambda_club must be in [0, 1]");
    require(cfg.batch >= 2, "batch must be at least 2");
    require(cfg.embed_dim >= 1, "embed_dim must be positive");
    require(!cfg.hidden.empty(), "hidden must name at least one layer");
    for (int h : cfg.hidden) require(h >= 1, "hidden sizes must be positive");
    require(cfg.lr_critic > 0.0, "lr_critic must be positive");
    require(cfg.lr_actor > 0.0, "lr_actor must be positive");
    require(cfg.alpha >= 0.0, "alpha must be non-negative");
    require(cfg.total_env_steps > 0, "total_env_steps must be positive");
    require(cfg.updates_per_step >= 1, "updates_per_step must be at least 1");
    require(cfg.eval_every > 0, "eval_every must be positive");
    require(cfg.eval_episodes >= 1, "eval_episodes must be at least 1");
    require(cfg.buffer_capacity >= 2, "buffer_capacity must be at least 2 episodes");
    require(cfg.warmup_steps >= 0, "warmup_steps must be non-negative");
    require(cfg.logit_penalty >= 0.0, "logit_penalty must be non-negative");
    require(cfg.episode_len >= 0, "episode_len must be non-negative (0 = env default)");
    require(cfg.chain_n >= 2, "chain_n must be at least 2");
    require(cfg.chain_p_forward > 0.0 && cfg.chain_p_forward <= 1.0,
            "chain_p_forward must be in (0, 1]");

    bool needs_aug = cfg.method == Method::visa || cfg.method == Method::only_augment;
    if (needs_aug && cfg.aug == AugTag::none) {
        throw ConfigError("method " + to_string(cfg.method) + " requires aug != none");
    }
    if (!needs_aug && cfg.aug != AugTag::none) {
        throw ConfigError("method " + to_string(cfg.method) + " requires aug = none");
    }
    if (cfg.critic_only && cfg.env != "chain") {
        throw ConfigError("critic_only training needs a tabular env (chain)");
    }

    // Env tag and env options must construct.
    try {
        EnvOptions opt;
        opt.episode_len = cfg.episode_len;
        opt.chain_n = cfg.chain_n;
        opt.chain_p_forward = cfg.chain_p_forward;
        make_env(cfg.env, opt);
    } catch (const InputError& e) {
        throw ConfigError(std::string("invalid env settings: ") + e.what());
    }
}

TrainConfig load_config(const std::string& path,
                        const std::map<std::string, std::string>& overrides) {
    TrainConfig cfg;
    apply_config(cfg, read_config_file(path));
    apply_config(cfg, overrides);
    validate_config(cfg);
    return cfg;
}

std::string config_to_string(const TrainConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    os << "env = " << cfg.env << "\n";
    os << "method = " << to_string(cfg.method) << "\n";
    os << "aug = " << to_string(cfg.aug) << "\n";
    os << "gamma = " << cfg.gamma << "\n";
    os << "gamma_aug = " << cfg.gamma_aug << "\n";
    os << "safe_convention = " << to_string(cfg.safe_convention) << "\n";
    os << "lambda_club = " << cfg.lambda_club << "\n";
    os << "batch = " << cfg.batch << "\n";
    os << "embed_dim = " << cfg.embed_dim << "\n";
    os << "hidden = ";
    for (size_t i = 0; i < cfg.hidden.size(); ++i) os << (i ? "," : "") << cfg.hidden[i];
    os << "\n";
    os << "lr_critic = " << cfg.lr_critic << "\n";
    os << "lr_actor = " << cfg.lr_actor << "\n";
    os << "alpha = " << cfg.alpha << "\n";
    os << "total_env_steps = " << cfg.total_env_steps << "\n";
    os << "updates_per_step = " << cfg.updates_per_step << "\n";
    os << "eval_every = " << cfg.eval_every << "\n";
    os << "eval_episodes = " << cfg.eval_episodes << "\n";
    os << "buffer_capacity = " << cfg.buffer_capacity << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "warmup_steps = " << cfg.warmup_steps << "\n";
    os << "bo_detach_base = " << (cfg.bo_detach_base ? "true" : "false") << "\n";
    os << "logit_penalty = " << cfg.logit_penalty << "\n";
    os << "critic_only = " << (cfg.critic_only ? "true" : "false") << "\n";
    os << "episode_len = " << cfg.episode_len << "\n";
    os << "chain_n = " << cfg.chain_n << "\n";
    os << "chain_p_forward = " << cfg.chain_p_forward << "\n";
    return os.str();
}

}  // namespace visa
