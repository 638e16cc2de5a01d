// spikeplast command-line interface: train / eval / ablate / export-weights /
// small-sample. Exit codes: 0 success, 1 runtime fault, 2 usage or config
// error.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "spikeplast/checkpoint.hpp"
#include "spikeplast/data_io.hpp"
#include "spikeplast/metrics.hpp"
#include "spikeplast/pipeline.hpp"
#include "spikeplast/run_config.hpp"

namespace fs = std::filesystem;
using namespace spikeplast;

namespace {

struct CommonFlags {
    std::string dataset;
    std::string config_path;
    std::string data_dir;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = -1;
    int per_class = -1;
    int conv_epochs = -1;
    int fc_epochs = -1;
    std::vector<std::string> disable;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--dataset", f.dataset, "Dataset id: mnist, fashion, cifar10")
        ->check(CLI::IsMember({"mnist", "fashion", "cifar10"}));
    cmd->add_option("--config", f.config_path, "JSON config file (flat dotted keys)");
    cmd->add_option("--data-dir", f.data_dir, "Dataset root (default $SPIKEPLAST_DATA or ./data)");
    cmd->add_option("--out", f.out_dir, "Output directory for run artifacts");
    cmd->add_option("--seed", f.seed, "Run seed")->each([&f](const std::string&) { f.seed_set = true; });
    cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
    cmd->add_option("--per-class", f.per_class, "Train on N samples per class (0 = full set)");
    cmd->add_option("--conv-epochs", f.conv_epochs, "Convolutional training epochs");
    cmd->add_option("--fc-epochs", f.fc_epochs, "Fully connected training epochs");
    cmd->add_option("--disable", f.disable, "Disable adaptive modules: asf, alic, atb")
        ->check(CLI::IsMember({"asf", "alic", "atb"}));
}

RunConfig resolve_config(const CommonFlags& f) {
    RunConfig cfg = load_run_config(f.dataset, f.config_path);
    if (!f.data_dir.empty()) cfg.data_dir = f.data_dir;
    if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
    if (f.seed_set) cfg.seed = f.seed;
    if (f.threads >= 0) cfg.threads = f.threads;
    if (f.per_class >= 0) cfg.per_class = f.per_class;
    if (f.conv_epochs >= 0) cfg.conv_epochs = f.conv_epochs;
    if (f.fc_epochs >= 0) cfg.fc_epochs = f.fc_epochs;
    for (const auto& d : f.disable) {
        if (d == "asf") cfg.net.asf = false;
        else if (d == "alic") cfg.net.alic = false;
        else if (d == "atb") cfg.net.atb = false;
    }
    cfg.validate();
    return cfg;
}

std::string first_existing(std::initializer_list<std::string> candidates) {
    for (const auto& c : candidates)
        if (fs::exists(c)) return c;
    std::string tried;
    for (const auto& c : candidates) tried += (tried.empty() ? "" : ", ") + c;
    // a missing dataset path is a configuration problem (exit 2)
    throw config_error("dataset file not found; tried: " + tried);
}

RawDataset load_split(const RunConfig& cfg, const std::string& split) {
    const std::string root = cfg.resolved_data_dir() + "/" + cfg.dataset;
    if (cfg.dataset == "cifar10") {
        if (split == "train") {
            std::vector<std::string> batches;
            for (int b = 1; b <= 5; ++b)
                batches.push_back(first_existing({root + "/data_batch_" + std::to_string(b) + ".bin"}));
            return load_cifar10(batches);
        }
        return load_cifar10({first_existing({root + "/test_batch.bin"})});
    }
    const std::string img_base = split == "train" ? "/train-images-idx3-ubyte" : "/t10k-images-idx3-ubyte";
    const std::string lab_base = split == "train" ? "/train-labels-idx1-ubyte" : "/t10k-labels-idx1-ubyte";
    return load_idx(first_existing({root + img_base, root + img_base + ".gz"}),
                    first_existing({root + lab_base, root + lab_base + ".gz"}));
}

TrainOptions make_train_opts(const RunConfig& cfg, bool checkpoint_epochs) {
    TrainOptions o;
    o.seed = cfg.seed;
    o.threads = cfg.threads;
    o.conv_epochs = cfg.conv_epochs;
    o.fc_epochs = cfg.fc_epochs;
    o.log = [](const std::string& m) { std::cout << "[spikeplast] " << m << "\n"; };
    if (checkpoint_epochs) {
        const std::string out = cfg.out_dir;
        const std::uint64_t seed = cfg.seed;
        o.on_epoch = [out, seed](const std::string& phase, int epoch, const Network& net) {
            save_checkpoint(out + "/ckpt_" + phase + "_epoch" + std::to_string(epoch) + ".bin",
                            net, VotingTable{}, seed);
        };
    }
    return o;
}

void write_summary(const RunConfig& cfg, const std::vector<MetricsRecord>& records,
                   const std::string& checkpoint_path) {
    nlohmann::json j;
    j["config"] = nlohmann::json::parse(cfg.flat_json());
    j["spec_hash"] = cfg.net.spec_hash();
    if (!checkpoint_path.empty()) j["checkpoint"] = checkpoint_path;
    auto& res = j["results"];
    for (const auto& r : records) res.push_back(nlohmann::json::parse(metrics_to_json(r)));
    std::ofstream f(cfg.out_dir + "/summary.json", std::ios::trunc);
    f << j.dump(2) << "\n";
}

void check_shape(const Network& net, const RawDataset& data) {
    if (net.spec.in_channels != data.channels || net.spec.in_h != data.h ||
        net.spec.in_w != data.w)
        throw config_error("checkpoint network shape (" + std::to_string(net.spec.in_channels) +
                           "x" + std::to_string(net.spec.in_h) + "x" + std::to_string(net.spec.in_w) +
                           ") does not match dataset shape (" + std::to_string(data.channels) + "x" +
                           std::to_string(data.h) + "x" + std::to_string(data.w) + ")");
}

// ---- subcommands ------------------------------------------------------------

int cmd_train(const CommonFlags& flags) {
    RunConfig cfg = resolve_config(flags);
    fs::create_directories(cfg.out_dir);
    RawDataset train = load_split(cfg, "train");
    if (cfg.per_class > 0) train = small_sample_subset(train, cfg.per_class, cfg.seed);
    std::cout << "[spikeplast] training on " << train.n << " samples (" << cfg.dataset << ")\n";

    const TrainOptions opts = make_train_opts(cfg, true);
    const Network net = train_layerwise(cfg.net, train, opts);
    const VotingTable votes = assign_votes(net, train, opts);
    const std::string ckpt = cfg.out_dir + "/checkpoint.bin";
    save_checkpoint(ckpt, net, votes, cfg.seed);

    const RawDataset test = load_split(cfg, "test");
    MetricsRecord rec = evaluate(net, votes, test, opts, "test");
    rec.epoch = cfg.fc_epochs;
    append_metrics_csv(cfg.out_dir + "/metrics.csv", rec);
    write_confusion_csv(cfg.out_dir + "/confusion_test.csv", rec);
    write_summary(cfg, {rec}, ckpt);
    std::cout << "[spikeplast] test accuracy " << rec.accuracy << " (" << rec.wall_seconds
              << " s eval)\n";
    return 0;
}

int cmd_eval(const CommonFlags& flags, const std::string& ckpt_path, const std::string& split) {
    RunConfig cfg = resolve_config(flags);
    fs::create_directories(cfg.out_dir);
    const Checkpoint ck = load_checkpoint(ckpt_path);
    if (ck.votes.assignment.empty())
        throw config_error("checkpoint has no voting table (per-epoch snapshot?); "
                           "run train to completion first");
    RawDataset data = load_split(cfg, split);
    check_shape(ck.net, data);

    TrainOptions opts;
    opts.seed = ck.seed;
    opts.threads = cfg.threads;
    MetricsRecord rec = evaluate(ck.net, ck.votes, data, opts, split);
    append_metrics_csv(cfg.out_dir + "/metrics.csv", rec);
    write_confusion_csv(cfg.out_dir + "/confusion_" + split + ".csv", rec);
    std::cout << "accuracy " << rec.accuracy << "\n";
    return 0;
}

void write_pgm(const std::string& path, const std::vector<double>& img, int h, int w) {
    double lo = img[0], hi = img[0];
    for (double v : img) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << "P5\n" << w << " " << h << "\n255\n";
    for (double v : img) {
        const int g = hi > lo ? static_cast<int>(255.0 * (v - lo) / (hi - lo) + 0.5) : 128;
        f.put(static_cast<char>(g));
    }
}

int cmd_export_weights(const std::string& ckpt_path, const std::string& out_dir, int fc_per_class) {
    const Checkpoint ck = load_checkpoint(ckpt_path);
    fs::create_directories(out_dir);
    const ConvGeometry& g = ck.net.conv.geom;
    const int k2 = g.kernel * g.kernel;

    for (int oc = 0; oc < g.out_channels; ++oc) {
        // input channels tiled horizontally with a 1px separator
        const int w = g.in_channels * (g.kernel + 1) - 1;
        std::vector<double> img(static_cast<std::size_t>(g.kernel) * w, 0.0);
        for (int ic = 0; ic < g.in_channels; ++ic)
            for (int y = 0; y < g.kernel; ++y)
                for (int x = 0; x < g.kernel; ++x)
                    img[static_cast<std::size_t>(y) * w + ic * (g.kernel + 1) + x] =
                        ck.net.conv.weights[(static_cast<std::size_t>(oc) * g.in_channels + ic) * k2 +
                                            y * g.kernel + x];
        write_pgm(out_dir + "/conv_kernel_" + std::to_string(oc) + ".pgm", img, g.kernel, w);
    }

    // fully connected: per-neuron weights reshaped to the pooled feature map,
    // channels tiled in a near-square grid; a handful per assigned class
    const NetworkSpec& spec = ck.net.spec;
    const int fh = spec.feature_h(), fw = spec.feature_w(), ch = spec.conv_channels;
    const int grid = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(ch))));
    const int rows = (ch + grid - 1) / grid;
    const int img_h = rows * (fh + 1) - 1, img_w = grid * (fw + 1) - 1;
    std::array<int, 10> exported{};
    for (int j = 0; j < ck.net.fc.neurons && !ck.votes.assignment.empty(); ++j) {
        const int cls = ck.votes.assignment[static_cast<std::size_t>(j)];
        if (cls < 0 || exported[cls] >= fc_per_class) continue;
        std::vector<double> img(static_cast<std::size_t>(img_h) * img_w, 0.0);
        for (int c = 0; c < ch; ++c) {
            const int gy = (c / grid) * (fh + 1), gx = (c % grid) * (fw + 1);
            for (int y = 0; y < fh; ++y)
                for (int x = 0; x < fw; ++x)
                    img[static_cast<std::size_t>(gy + y) * img_w + gx + x] =
                        ck.net.fc.weights[static_cast<std::size_t>(j) * spec.features() +
                                          (static_cast<std::size_t>(c) * fh + y) * fw + x];
        }
        write_pgm(out_dir + "/fc_class" + std::to_string(cls) + "_n" + std::to_string(j) + ".pgm",
                  img, img_h, img_w);
        ++exported[cls];
    }
    std::cout << "exported weight images to " << out_dir << "\n";
    return 0;
}

int cmd_ablate(const CommonFlags& flags, const std::vector<std::string>& set_args) {
    RunConfig cfg = resolve_config(flags);
    fs::create_directories(cfg.out_dir);
    RawDataset train = load_split(cfg, "train");
    if (cfg.per_class > 0) train = small_sample_subset(train, cfg.per_class, cfg.seed);
    const RawDataset test = load_split(cfg, "test");

    std::vector<AblationSetting> settings{{"baseline", true, true, true}};
    std::vector<std::string> sets = set_args;
    if (sets.empty()) sets = {"asf", "asf,alic", "asf,alic,atb"};
    for (const auto& s : sets) {
        AblationSetting a;
        a.name = "wo_";
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item == "asf") a.asf = false;
            else if (item == "alic") a.alic = false;
            else if (item == "atb") a.atb = false;
            else throw config_error("unknown ablation module '" + item + "'");
            a.name += item + "_";
        }
        a.name.pop_back();
        settings.push_back(a);
    }

    const TrainOptions opts = make_train_opts(cfg, false);
    const auto records = run_ablation(cfg.net, settings, train, test, opts);
    for (const auto& r : records) {
        append_metrics_csv(cfg.out_dir + "/ablation.csv", r);
        std::cout << r.split << ": accuracy " << r.accuracy << "\n";
    }
    write_summary(cfg, records, "");
    return 0;
}

int cmd_small_sample(const CommonFlags& flags, int seeds) {
    RunConfig cfg = resolve_config(flags);
    if (cfg.per_class < 1) throw config_error("small-sample requires --per-class >= 1");
    fs::create_directories(cfg.out_dir);
    const RawDataset full_train = load_split(cfg, "train");
    const RawDataset test = load_split(cfg, "test");

    std::vector<MetricsRecord> records;
    double mean = 0.0;
    for (int k = 0; k < seeds; ++k) {
        RunConfig run = cfg;
        run.seed = cfg.seed + static_cast<std::uint64_t>(k);
        const RawDataset train = small_sample_subset(full_train, cfg.per_class, run.seed);
        const TrainOptions opts = make_train_opts(run, false);
        const Network net = train_layerwise(run.net, train, opts);
        const VotingTable votes = assign_votes(net, train, opts);
        MetricsRecord rec = evaluate(net, votes, test, opts, "test");
        rec.split = "per_class_" + std::to_string(cfg.per_class) + "_seed" + std::to_string(k);
        append_metrics_csv(cfg.out_dir + "/small_sample.csv", rec);
        std::cout << rec.split << ": accuracy " << rec.accuracy << "\n";
        mean += rec.accuracy;
        records.push_back(std::move(rec));
    }
    mean /= seeds;
    std::cout << "mean accuracy over " << seeds << " seeds: " << mean << "\n";
    write_summary(cfg, records, "");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unsupervised spiking-network training with trace STDP and adaptive mechanisms"};
    app.require_subcommand(1);

    CommonFlags train_flags, eval_flags, ablate_flags, small_flags;
    std::string ckpt_path, split = "test", export_out = "weights";
    int fc_per_class = 10, seeds = 3;
    std::vector<std::string> ablate_sets;

    auto* train = app.add_subcommand("train", "Layer-wise unsupervised training + voting readout");
    add_common(train, train_flags);

    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
    add_common(eval, eval_flags);
    eval->add_option("--checkpoint", ckpt_path, "Checkpoint file")->required();
    eval->add_option("--split", split, "Dataset split")->check(CLI::IsMember({"train", "test"}));

    auto* exp = app.add_subcommand("export-weights", "Write kernel / neuron weight images (PGM)");
    exp->add_option("--checkpoint", ckpt_path, "Checkpoint file")->required();
    exp->add_option("--out", export_out, "Output directory");
    exp->add_option("--fc-per-class", fc_per_class, "Neuron images per class");

    auto* ablate = app.add_subcommand("ablate", "Train/evaluate with adaptive modules disabled");
    add_common(ablate, ablate_flags);
    ablate->add_option("--set", ablate_sets,
                       "Comma-joined modules to disable per setting (repeatable); "
                       "default: asf | asf,alic | asf,alic,atb");

    auto* small = app.add_subcommand("small-sample", "Repeated small-sample training runs");
    add_common(small, small_flags);
    small->add_option("--seeds", seeds, "Number of seeds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(train)) return cmd_train(train_flags);
        if (app.got_subcommand(eval)) return cmd_eval(eval_flags, ckpt_path, split);
        if (app.got_subcommand(exp)) return cmd_export_weights(ckpt_path, export_out, fc_per_class);
        if (app.got_subcommand(ablate)) return cmd_ablate(ablate_flags, ablate_sets);
        if (app.got_subcommand(small)) return cmd_small_sample(small_flags, seeds);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
