// Command-line entry point: train/evaluate noisy autoencoders, run the
// verification oracle suites, and generate synthetic datasets.
//
// Exit codes: 0 success, 1 verification/metric failure, 2 usage/config error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "nae/analysis.hpp"
#include "nae/checkpoint.hpp"
#include "nae/config.hpp"
#include "nae/data_io.hpp"
#include "nae/synth.hpp"
#include "nae/training.hpp"
#include "nae/verify.hpp"

namespace fs = std::filesystem;
using namespace nae;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool force = false;
};

// All randomized commands require an explicit seed (flag or config key);
// wall-clock seeding would break reproducibility.
std::uint64_t resolve_seed(const CommonOpts &opts, Config &cfg) {
    if (opts.seed) return *opts.seed;
    if (cfg.has("seed")) return cfg.get_u64("seed");
    throw std::runtime_error("an explicit seed is required (--seed or 'seed =')");
}

void require_writable(const fs::path &artifact, bool force) {
    if (fs::exists(artifact) && !force)
        throw std::runtime_error("refusing to overwrite " + artifact.string() +
                                 " (pass --force)");
}

fs::path prepare_out_dir(const std::string &out) {
    if (out.empty()) throw std::runtime_error("an output directory is required (--out)");
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

std::string existing_path(Config &cfg, const std::string &key) {
    const std::string p = cfg.get_string(key);
    if (!fs::exists(p))
        throw std::runtime_error("config key '" + key + "' points to a missing path: " + p);
    return p;
}

Dataset load_dataset(Config &cfg, const std::string &images_key,
                     const std::string &labels_key) {
    const std::string images = existing_path(cfg, images_key);
    std::string labels;
    if (cfg.has(labels_key)) labels = existing_path(cfg, labels_key);
    return load_mnist_idx(images, labels);
}

Dataset dataset_from_patches(const PatchSet &ps) {
    Dataset ds;
    ds.samples = ps.patches;
    ds.scale_min = -1.0;
    ds.scale_max = 1.0;
    return ds;
}

NaeParams build_nae(Config &cfg, std::uint64_t seed, std::size_t input_dim) {
    const std::size_t hidden = cfg.get_size("model.hidden", 0);
    if (hidden == 0) throw std::runtime_error("model.hidden must be set");
    const Nonlin enc = nonlin_from_name(cfg.get_string("model.encoder", "sigmoid"));
    const Nonlin dec = nonlin_from_name(cfg.get_string("model.decoder", "linear"));
    const bool tied = cfg.get_bool("model.tied", false);
    Rng rng(seed);
    return init_nae_params(rng, input_dim, hidden, enc, dec, tied);
}

void write_effective_config(Config &cfg, std::uint64_t seed, const fs::path &dir,
                            bool force) {
    cfg.set("seed", std::to_string(seed));
    const fs::path path = dir / "effective.cfg";
    require_writable(path, force);
    cfg.save(path.string());
}

void export_filters_if_square(const NaeParams &params, const fs::path &path) {
    const std::size_t dim = params.input_dim();
    const std::size_t edge = static_cast<std::size_t>(std::lround(std::sqrt(double(dim))));
    if (edge * edge != dim) {
        std::cerr << "note: input dim " << dim
                  << " is not square; skipping filter grid export\n";
        return;
    }
    export_filter_grid(params.W, edge, path.string());
}

// ---- commands ----------------------------------------------------------

int cmd_train(const CommonOpts &opts) {
    Config cfg = Config::load(opts.config_path);
    const std::uint64_t seed = resolve_seed(opts, cfg);
    const fs::path dir = prepare_out_dir(opts.out_dir);
    const fs::path ckpt = dir / "model.ckpt";
    const fs::path log_csv = dir / "train_log.csv";
    const fs::path filters = dir / "filters.pgm";
    require_writable(ckpt, opts.force);
    require_writable(log_csv, opts.force);

    Dataset data;
    if (cfg.has("data.patches")) {
        data = dataset_from_patches(load_patches(existing_path(cfg, "data.patches")));
    } else {
        data = load_dataset(cfg, "data.train", "data.train_labels");
    }
    const std::size_t subset = cfg.get_size("data.subset", data.size());
    data = data.head(subset);

    const NoiseSpec noise = noise_spec_from_config(cfg);
    const PenaltyConfig penalties = penalties_from_config(cfg, noise);
    TrainConfig tc = train_config_from_config(cfg, noise, penalties);
    tc.seed = seed;

    Dataset val;
    const double val_fraction = cfg.get_double("data.val_fraction", 0.0);
    const Dataset *val_ptr = nullptr;
    if (val_fraction > 0.0) {
        const std::size_t n_val =
            static_cast<std::size_t>(val_fraction * double(data.size()));
        val = data.slice(data.size() - n_val, data.size());
        data = data.slice(0, data.size() - n_val);
        val_ptr = &val;
    }

    NaeParams init = build_nae(cfg, seed, data.dim());
    cfg.require_all_consumed();
    write_effective_config(cfg, seed, dir, opts.force);

    auto [params, log] = train_nae(data, std::move(init), tc, val_ptr);
    save_checkpoint(ckpt.string(), params);
    log.to_csv(log_csv.string());
    export_filters_if_square(params, filters);
    if (log.diverged) {
        std::cerr << "training diverged; last good checkpoint written\n";
        return kExitCheckFailed;
    }
    std::cout << "final train loss " << log.epochs.back().train_loss << "\n";
    return kExitOk;
}

int cmd_finetune(const CommonOpts &opts) {
    Config cfg = Config::load(opts.config_path);
    const std::uint64_t seed = resolve_seed(opts, cfg);
    const fs::path dir = prepare_out_dir(opts.out_dir);
    const fs::path ckpt = dir / "mlp.ckpt";
    const fs::path log_csv = dir / "finetune_log.csv";
    require_writable(ckpt, opts.force);
    require_writable(log_csv, opts.force);

    const NaeParams features =
        load_nae_checkpoint(existing_path(cfg, "model.init"));
    Dataset data = load_dataset(cfg, "data.train", "data.train_labels");
    data = data.head(cfg.get_size("data.subset", data.size()));
    if (!data.labeled()) throw std::runtime_error("fine-tuning needs labels");

    Dataset test;
    const Dataset *test_ptr = nullptr;
    if (cfg.has("data.test")) {
        test = load_dataset(cfg, "data.test", "data.test_labels");
        test_ptr = &test;
    }

    int max_label = 0;
    for (int l : data.labels) max_label = std::max(max_label, l);
    const std::size_t classes =
        cfg.get_size("model.classes", static_cast<std::size_t>(max_label) + 1);

    const NoiseSpec noise = noise_spec_from_config(cfg);
    TrainConfig tc = train_config_from_config(cfg, noise, PenaltyConfig{});
    tc.loss = LossKind::cross_entropy;  // classifier head objective
    tc.seed = seed;
    cfg.require_all_consumed();
    write_effective_config(cfg, seed, dir, opts.force);

    auto [mlp, log] = fine_tune_classifier(features, data, classes, tc, test_ptr);
    save_checkpoint(ckpt.string(), mlp);
    log.to_csv(log_csv.string());
    if (log.diverged) {
        std::cerr << "fine-tuning diverged; last good checkpoint written\n";
        return kExitCheckFailed;
    }
    if (test_ptr != nullptr) {
        const std::size_t errors = classification_error(mlp, test, noise);
        std::cout << "test errors " << errors << " / " << test.size() << "\n";
    }
    return kExitOk;
}

int cmd_denoise_eval(const CommonOpts &opts) {
    Config cfg = Config::load(opts.config_path);
    const std::uint64_t seed = resolve_seed(opts, cfg);
    const NaeParams params =
        load_nae_checkpoint(existing_path(cfg, "model.checkpoint"));
    const Dataset data =
        dataset_from_patches(load_patches(existing_path(cfg, "data.patches")));
    const double var = cfg.get_double("eval.noise_var");
    const std::size_t draws = cfg.get_size("eval.draws", 10);
    const NoiseSpec noise = noise_spec_from_config(cfg);
    cfg.require_all_consumed();
    Rng rng(seed);
    const double err = denoise_eval(params, data, noise, var, draws, rng);
    std::cout << "denoise error " << err << "\n";
    return kExitOk;
}

int cmd_export_filters(const std::string &checkpoint, const std::string &out,
                       bool force) {
    const NaeParams params = load_nae_checkpoint(checkpoint);
    require_writable(out, force);
    const std::size_t dim = params.input_dim();
    const std::size_t edge = static_cast<std::size_t>(std::lround(std::sqrt(double(dim))));
    if (edge * edge != dim)
        throw std::runtime_error("input dim " + std::to_string(dim) +
                                 " is not a square; cannot tile filters");
    export_filter_grid(params.W, edge, out);
    return kExitOk;
}

int cmd_analyze(const CommonOpts &opts) {
    Config cfg = Config::load(opts.config_path);
    const fs::path dir = prepare_out_dir(opts.out_dir);
    const fs::path report_csv = dir / "metrics.csv";
    require_writable(report_csv, opts.force);

    const std::string ckpt = existing_path(cfg, "model.checkpoint");
    Dataset data;
    if (cfg.has("data.patches"))
        data = dataset_from_patches(load_patches(existing_path(cfg, "data.patches")));
    else
        data = load_dataset(cfg, "data.test", "data.test_labels");
    data = data.head(cfg.get_size("data.subset", data.size()));
    const NoiseSpec noise = noise_spec_from_config(cfg);

    MetricsReport report;
    if (checkpoint_type(ckpt) == 2) {
        const MlpParams mlp = load_mlp_checkpoint(ckpt);
        for (std::size_t l = 0; l < mlp.n_hidden_layers(); ++l) {
            const Matrix acts = hidden_activations(mlp, data.samples, noise, l);
            LayerStats ls;
            auto [lifetime, population] = sparsity_metrics(acts);
            ls.lifetime_sparsity = std::move(lifetime);
            ls.population_sparsity = std::move(population);
            auto [corr, cum] = correlation_and_spectrum(acts);
            ls.correlation = std::move(corr);
            ls.cum_variance = std::move(cum);
            save_matrix_raw(
                (dir / ("correlation_layer" + std::to_string(l) + ".bin")).string(),
                ls.correlation);
            report.layers.push_back(std::move(ls));
        }
        if (data.labeled())
            report.test_errors = classification_error(mlp, data, noise);
    } else {
        const NaeParams params = load_nae_checkpoint(ckpt);
        const Matrix acts = encode_deterministic_batch(params, data.samples, noise);
        LayerStats ls;
        auto [lifetime, population] = sparsity_metrics(acts);
        ls.lifetime_sparsity = std::move(lifetime);
        ls.population_sparsity = std::move(population);
        auto [corr, cum] = correlation_and_spectrum(acts);
        ls.correlation = std::move(corr);
        ls.cum_variance = std::move(cum);
        save_matrix_raw((dir / "correlation_layer0.bin").string(), ls.correlation);
        report.layers.push_back(std::move(ls));
    }
    cfg.require_all_consumed();
    report.to_csv(report_csv.string());
    std::cout << "metrics written to " << report_csv.string() << "\n";
    return kExitOk;
}

int cmd_verify(const std::string &suite, std::uint64_t seed) {
    const auto results = run_verify_suite(suite, seed);
    bool ok = true;
    for (const CheckResult &r : results) {
        std::printf("[%s] %s (max err %.3g)%s%s\n", r.pass ? "PASS" : "FAIL",
                    r.name.c_str(), r.max_err, r.detail.empty() ? "" : " -- ",
                    r.detail.c_str());
        ok = ok && r.pass;
    }
    if (!ok) {
        std::cerr << "verification FAILED\n";
        return kExitCheckFailed;
    }
    return kExitOk;
}

int cmd_pipeline(const CommonOpts &opts) {
    Config cfg = Config::load(opts.config_path);
    const std::uint64_t seed = resolve_seed(opts, cfg);
    const fs::path dir = prepare_out_dir(opts.out_dir);
    const fs::path grid_csv = dir / "grid_errors.csv";
    require_writable(grid_csv, opts.force);

    Dataset train = load_dataset(cfg, "data.train", "data.train_labels");
    const std::size_t subset = cfg.get_size("data.subset", 10000);
    train = train.head(subset);
    Dataset test;
    const Dataset *test_ptr = nullptr;
    if (cfg.has("data.test")) {
        test = load_dataset(cfg, "data.test", "data.test_labels");
        test_ptr = &test;
    }

    const std::vector<double> input_vars =
        cfg.get_double_list("pipeline.input_vars", {0.0, 0.1, 0.25, 0.5});
    const std::vector<double> dropout_ps =
        cfg.get_double_list("pipeline.dropout_ps", {1.0, 0.75, 0.5, 0.25});

    TrainConfig pre = train_config_from_config(cfg, NoiseSpec{}, PenaltyConfig{});
    pre.seed = seed;

    TrainConfig ft = pre;
    ft.epochs = cfg.get_size("finetune.epochs", 5);
    ft.head_epochs = cfg.get_size("finetune.head_epochs", 2);
    ft.learning_rate = cfg.get_double("finetune.lr", pre.learning_rate);
    ft.loss = LossKind::cross_entropy;
    NoiseSpec ft_noise;
    ft_noise.input = cfg.get_noise("finetune.noise.input", NoiseDist::none());
    ft_noise.activation = cfg.get_noise("finetune.noise.activation", NoiseDist::none());
    ft.noise = ft_noise;

    int max_label = 0;
    for (int l : train.labels) max_label = std::max(max_label, l);
    const std::size_t classes = static_cast<std::size_t>(max_label) + 1;

    // The same seed builds the same initial weights for every grid cell, so
    // cells differ only in the injected noise.
    const NaeParams shared_init = build_nae(cfg, seed, train.dim());
    cfg.require_all_consumed();
    write_effective_config(cfg, seed, dir, opts.force);

    std::ofstream grid_out(grid_csv);
    grid_out << "input_var,dropout_p,test_errors,test_size\n";
    for (const double ivar : input_vars) {
        for (const double p : dropout_ps) {
            NoiseSpec noise;
            if (ivar > 0.0) noise.input = NoiseDist::additive_gaussian(ivar);
            if (p < 1.0) noise.activation = NoiseDist::dropout(p);
            TrainConfig cell_cfg = pre;
            cell_cfg.noise = noise;
            NaeParams init = shared_init;
            auto [params, plog] = train_nae(train, std::move(init), cell_cfg);

            std::ostringstream tag;
            tag << "ivar" << ivar << "_p" << p;
            export_filters_if_square(params, dir / ("filters_" + tag.str() + ".pgm"));
            save_checkpoint((dir / ("nae_" + tag.str() + ".ckpt")).string(), params);

            std::size_t errors = 0, total = 0;
            if (test_ptr != nullptr) {
                auto [mlp, flog] =
                    fine_tune_classifier(params, train, classes, ft, test_ptr);
                errors = classification_error(mlp, test, ft.noise);
                total = test.size();
            }
            grid_out << ivar << "," << p << "," << errors << "," << total << "\n";
            std::cout << "cell " << tag.str() << ": test errors " << errors << "/"
                      << total << "\n";
        }
    }
    return kExitOk;
}

int cmd_synth_digits(const std::string &out, std::size_t n_train, std::size_t n_test,
                     std::uint64_t seed, bool force) {
    const fs::path dir = prepare_out_dir(out);
    const fs::path files[4] = {dir / "train-images.idx", dir / "train-labels.idx",
                               dir / "test-images.idx", dir / "test-labels.idx"};
    for (const fs::path &f : files) require_writable(f, force);
    Rng rng(seed);
    const Dataset train = make_digit_dataset(rng, n_train);
    const Dataset test = make_digit_dataset(rng, n_test);
    save_mnist_idx_images(files[0].string(), train.samples, 28, 28);
    save_mnist_idx_labels(files[1].string(), train.labels);
    save_mnist_idx_images(files[2].string(), test.samples, 28, 28);
    save_mnist_idx_labels(files[3].string(), test.labels);
    std::cout << "wrote " << n_train << " train and " << n_test
              << " test digits under " << dir.string() << "\n";
    return kExitOk;
}

int cmd_synth_patches(const std::string &out, std::size_t count, std::size_t edge,
                      std::size_t images, std::size_t image_size,
                      std::uint64_t seed, bool force) {
    require_writable(out, force);
    Rng rng(seed);
    const PatchSet ps = make_plasma_patches(rng, count, edge, images, image_size);
    save_patches(out, ps);
    std::cout << "wrote " << count << " " << edge << "x" << edge << " patches to "
              << out << "\n";
    return kExitOk;
}

void add_common(CLI::App *sub, CommonOpts &opts, bool needs_out = true) {
    sub->add_option("--config", opts.config_path, "run configuration file")->required();
    if (needs_out)
        sub->add_option("--out", opts.out_dir, "output directory")->required();
    sub->add_option("--seed", opts.seed, "RNG seed (overrides config)");
    sub->add_flag("--force", opts.force, "overwrite existing artifacts");
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"noisy autoencoders: training, marginalized penalties, and "
                 "verification oracles"};
    app.require_subcommand(1);

    CommonOpts train_opts, finetune_opts, denoise_opts, analyze_opts, pipeline_opts;
    std::string ckpt_path, out_path, suite;
    std::uint64_t verify_seed = 20260810;
    std::size_t n_train = 10000, n_test = 2000, count = 20000, edge = 12,
                images = 20, image_size = 128;
    std::uint64_t synth_seed = 0;
    bool force_flag = false;

    CLI::App *train = app.add_subcommand("train", "train an autoencoder");
    add_common(train, train_opts);

    CLI::App *finetune = app.add_subcommand(
        "finetune", "fine-tune a softmax classifier on a pretrained autoencoder");
    add_common(finetune, finetune_opts);

    CLI::App *denoise = app.add_subcommand(
        "denoise-eval", "average reconstruction error on noisy held-out inputs");
    add_common(denoise, denoise_opts, false);

    CLI::App *exportf =
        app.add_subcommand("export-filters", "write encoder rows as a PGM tile grid");
    exportf->add_option("--checkpoint", ckpt_path, "autoencoder checkpoint")->required();
    exportf->add_option("--out", out_path, "output PGM path")->required();
    exportf->add_flag("--force", force_flag, "overwrite existing file");

    CLI::App *analyze = app.add_subcommand(
        "analyze", "sparsity, correlation and spectrum statistics of a model");
    add_common(analyze, analyze_opts);

    CLI::App *verify = app.add_subcommand(
        "verify", "run an oracle suite: penalties | gradients | noise | taylor");
    verify->add_option("suite", suite, "suite name")->required();
    verify->add_option("--seed", verify_seed, "RNG seed for the oracles");

    CLI::App *pipeline = app.add_subcommand(
        "pipeline-mnist", "pretrain/fine-tune across an input-noise x dropout grid");
    add_common(pipeline, pipeline_opts);

    CLI::App *synthd =
        app.add_subcommand("synth-digits", "generate a synthetic digit IDX dataset");
    synthd->add_option("--out", out_path, "output directory")->required();
    synthd->add_option("--train", n_train, "training digits");
    synthd->add_option("--test", n_test, "test digits");
    synthd->add_option("--seed", synth_seed, "RNG seed")->required();
    synthd->add_flag("--force", force_flag, "overwrite existing files");

    CLI::App *synthp =
        app.add_subcommand("synth-patches", "generate 1/f-style image patches");
    synthp->add_option("--out", out_path, "output NAEPATCH file")->required();
    synthp->add_option("--count", count, "number of patches");
    synthp->add_option("--edge", edge, "patch edge length");
    synthp->add_option("--images", images, "number of source images");
    synthp->add_option("--image-size", image_size, "source image edge length");
    synthp->add_option("--seed", synth_seed, "RNG seed")->required();
    synthp->add_flag("--force", force_flag, "overwrite existing file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*train) return cmd_train(train_opts);
        if (*finetune) return cmd_finetune(finetune_opts);
        if (*denoise) return cmd_denoise_eval(denoise_opts);
        if (*exportf) return cmd_export_filters(ckpt_path, out_path, force_flag);
        if (*analyze) return cmd_analyze(analyze_opts);
        if (*verify) {
            try {
                return cmd_verify(suite, verify_seed);
            } catch (const std::invalid_argument &e) {
                std::cerr << e.what() << "\n"
                          << "usage: nae verify <penalties|gradients|noise|taylor>\n";
                return kExitUsage;
            }
        }
        if (*pipeline) return cmd_pipeline(pipeline_opts);
        if (*synthd)
            return cmd_synth_digits(out_path, n_train, n_test, synth_seed, force_flag);
        if (*synthp)
            return cmd_synth_patches(out_path, count, edge, images, image_size,
                                     synth_seed, force_flag);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
