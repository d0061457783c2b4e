#include "nae/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nae {

namespace {

std::string trim(const std::string &s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::load(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
}

Config Config::from_string(const std::string &text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": empty key");
        cfg.set(key, value);
    }
    return cfg;
}

Config::Entry *Config::find(const std::string &key) {
    for (Entry &e : entries_)
        if (e.key == key) return &e;
    return nullptr;
}

const Config::Entry *Config::find(const std::string &key) const {
    for (const Entry &e : entries_)
        if (e.key == key) return &e;
    return nullptr;
}

bool Config::has(const std::string &key) const { return find(key) != nullptr; }

std::string Config::get_string(const std::string &key) {
    const Entry *e = find(key);
    if (!e) throw std::runtime_error("config: missing required key '" + key + "'");
    e->consumed = true;
    return e->value;
}

std::string Config::get_string(const std::string &key, const std::string &fallback) {
    const Entry *e = find(key);
    if (!e) return fallback;
    e->consumed = true;
    return e->value;
}

double Config::get_double(const std::string &key) {
    const std::string v = get_string(key);
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception &) {
        throw std::runtime_error("config: key '" + key + "' is not a number: " + v);
    }
    if (used != v.size())
        throw std::runtime_error("config: key '" + key + "' is not a number: " + v);
    return out;
}

double Config::get_double(const std::string &key, double fallback) {
    return has(key) ? get_double(key) : fallback;
}

std::size_t Config::get_size(const std::string &key, std::size_t fallback) {
    if (!has(key)) return fallback;
    const double v = get_double(key);
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
        throw std::runtime_error("config: key '" + key + "' is not a count");
    return static_cast<std::size_t>(v);
}

std::uint64_t Config::get_u64(const std::string &key) {
    const std::string v = get_string(key);
    try {
        return std::stoull(v);
    } catch (const std::exception &) {
        throw std::runtime_error("config: key '" + key + "' is not an integer: " + v);
    }
}

bool Config::get_bool(const std::string &key, bool fallback) {
    if (!has(key)) return fallback;
    const std::string v = get_string(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::runtime_error("config: key '" + key + "' is not a boolean: " + v);
}

NoiseDist Config::get_noise(const std::string &key, const NoiseDist &fallback) {
    if (!has(key)) return fallback;
    return NoiseDist::parse(get_string(key));
}

std::vector<double> Config::get_double_list(const std::string &key,
                                            const std::vector<double> &fallback) {
    if (!has(key)) return fallback;
    const std::string v = get_string(key);
    std::vector<double> out;
    std::istringstream in(v);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    if (out.empty())
        throw std::runtime_error("config: key '" + key + "' is an empty list");
    return out;
}

void Config::set(const std::string &key, const std::string &value) {
    if (Entry *e = find(key)) {
        e->value = value;
        e->consumed = true;  // program-written keys are known by definition
        return;
    }
    entries_.push_back({key, value, true});
}

void Config::set_double(const std::string &key, double value) {
    std::ostringstream os;
    os.precision(17);
    os << value;
    set(key, os.str());
}

void Config::require_all_consumed() const {
    std::string unknown;
    for (const Entry &e : entries_)
        if (!e.consumed) unknown += (unknown.empty() ? "" : ", ") + e.key;
    if (!unknown.empty())
        throw std::runtime_error("config: unknown key(s): " + unknown);
}

std::string Config::to_string() const {
    std::ostringstream os;
    for (const Entry &e : entries_) os << e.key << " = " << e.value << "\n";
    return os.str();
}

void Config::save(const std::string &path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config: " + path);
    out << to_string();
}

NoiseSpec noise_spec_from_config(Config &cfg) {
    NoiseSpec spec;
    spec.input = cfg.get_noise("noise.input", NoiseDist::none());
    spec.pre_activation = cfg.get_noise("noise.pre", NoiseDist::none());
    spec.activation = cfg.get_noise("noise.activation", NoiseDist::none());
    spec.validate();
    return spec;
}

void noise_spec_to_config(const NoiseSpec &spec, Config &cfg) {
    cfg.set("noise.input", spec.input.to_string());
    cfg.set("noise.pre", spec.pre_activation.to_string());
    cfg.set("noise.activation", spec.activation.to_string());
}

PenaltyConfig penalties_from_config(Config &cfg, const NoiseSpec &noise) {
    PenaltyConfig pc;
    auto add = [&](const std::string &name, PenaltyKind kind, NoiseDist dist) {
        const double w = cfg.get_double("penalty." + name, 0.0);
        if (w > 0.0) pc.terms.push_back({kind, w, dist});
    };
    add("hidden", PenaltyKind::hidden, noise.activation);
    add("prenoise", PenaltyKind::prenoise,
        NoiseDist::additive_gaussian(noise.pre_activation.var));
    add("input", PenaltyKind::input, NoiseDist::additive_gaussian(noise.input.var));
    add("tied_gaussian", PenaltyKind::tied_gaussian,
        NoiseDist::additive_gaussian(noise.input.var));
    add("contractive", PenaltyKind::contractive, NoiseDist::none());
    if (cfg.has("penalty.dropout_pf")) {
        const double w = cfg.get_double("penalty.dropout_pf");
        const double p = cfg.get_double("penalty.dropout_pf.p",
                                        noise.activation.kind == NoiseKind::dropout
                                            ? noise.activation.p
                                            : 0.5);
        if (w > 0.0)
            pc.terms.push_back({PenaltyKind::dropout_pf, w, NoiseDist::dropout(p)});
    }
    add("poisson_sparse", PenaltyKind::poisson_sparse, NoiseDist::poisson_like());
    return pc;
}

TrainConfig train_config_from_config(Config &cfg, const NoiseSpec &noise,
                                     const PenaltyConfig &penalties) {
    TrainConfig tc;
    tc.noise = noise;
    tc.penalties = penalties;
    tc.learning_rate = cfg.get_double("train.lr", tc.learning_rate);
    tc.momentum = cfg.get_double("train.momentum", tc.momentum);
    tc.nesterov = cfg.get_bool("train.nesterov", tc.nesterov);
    tc.lr_decay = cfg.get_double("train.lr_decay", tc.lr_decay);
    tc.batch_size = cfg.get_size("train.batch", tc.batch_size);
    tc.epochs = cfg.get_size("train.epochs", tc.epochs);
    tc.head_epochs = cfg.get_size("train.head_epochs", tc.head_epochs);
    tc.shuffle = cfg.get_bool("train.shuffle", tc.shuffle);
    const std::string obj = cfg.get_string("train.objective", "stochastic");
    if (obj == "stochastic")
        tc.objective = Objective::stochastic;
    else if (obj == "analytic")
        tc.objective = Objective::analytic;
    else if (obj == "both")
        tc.objective = Objective::both;
    else
        throw std::runtime_error("config: train.objective must be "
                                 "stochastic|analytic|both, got " + obj);
    const std::string lk = cfg.get_string("model.loss", "squared");
    if (lk == "squared")
        tc.loss = LossKind::squared;
    else if (lk == "cross_entropy")
        tc.loss = LossKind::cross_entropy;
    else
        throw std::runtime_error("config: model.loss must be "
                                 "squared|cross_entropy, got " + lk);
    tc.validate();
    return tc;
}

}  // namespace nae
