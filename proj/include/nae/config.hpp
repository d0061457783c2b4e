#ifndef NAE_CONFIG_HPP
#define NAE_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "nae/noise.hpp"
#include "nae/penalties.hpp"
#include "nae/training.hpp"

namespace nae {

/// Plain key-value run configuration.
///
/// Grammar, one entry per line:
///   key = value        keys are dotted lowercase identifiers
///   # comment          blank lines and #-to-end-of-line comments ignored
///
/// Values are read as strings; typed getters parse on demand. Every key a
/// command reads is marked consumed; require_all_consumed() then rejects
/// files with unknown keys. Insertion order is preserved so a saved
/// effective config is diffable.
class Config {
public:
    static Config load(const std::string &path);
    static Config from_string(const std::string &text);

    bool has(const std::string &key) const;

    std::string get_string(const std::string &key);
    std::string get_string(const std::string &key, const std::string &fallback);
    double get_double(const std::string &key);
    double get_double(const std::string &key, double fallback);
    std::size_t get_size(const std::string &key, std::size_t fallback);
    std::uint64_t get_u64(const std::string &key);
    bool get_bool(const std::string &key, bool fallback);
    NoiseDist get_noise(const std::string &key, const NoiseDist &fallback);
    /// Comma-separated list of doubles.
    std::vector<double> get_double_list(const std::string &key,
                                        const std::vector<double> &fallback);

    void set(const std::string &key, const std::string &value);
    void set_double(const std::string &key, double value);

    /// Throws listing every key that was never consumed.
    void require_all_consumed() const;

    void save(const std::string &path) const;
    std::string to_string() const;

private:
    struct Entry {
        std::string key, value;
        mutable bool consumed = false;
    };
    Entry *find(const std::string &key);
    const Entry *find(const std::string &key) const;
    std::vector<Entry> entries_;
};

/// noise.input / noise.pre / noise.activation.
NoiseSpec noise_spec_from_config(Config &cfg);
void noise_spec_to_config(const NoiseSpec &spec, Config &cfg);

/// penalty.<name> = weight entries; parameters default to the matching
/// noise.* entries (penalty.hidden uses noise.activation, penalty.prenoise
/// uses noise.pre, penalty.input / penalty.tied_gaussian use noise.input,
/// penalty.dropout_pf takes penalty.dropout_pf.p).
PenaltyConfig penalties_from_config(Config &cfg, const NoiseSpec &noise);

/// train.* entries plus seed.
TrainConfig train_config_from_config(Config &cfg, const NoiseSpec &noise,
                                     const PenaltyConfig &penalties);

}  // namespace nae

#endif
