#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "adverin/attack.hpp"
#include "adverin/container.hpp"
#include "adverin/dataset.hpp"
#include "adverin/gradcheck.hpp"
#include "adverin/intensity_map.hpp"
#include "adverin/log.hpp"
#include "adverin/metrics.hpp"
#include "adverin/region_mask.hpp"
#include "adverin/rng.hpp"
#include "adverin/segnet.hpp"
#include "adverin/synthdata.hpp"
#include "adverin/trainer.hpp"

namespace {

namespace fs = std::filesystem;
using namespace adverin;

struct GenFlags {
    std::string out;
    int domains = 4;
    int per_domain = 100;
    int size = 64;
    std::uint64_t seed = 0;
};

struct MaskFlags {
    std::string data;
    int k = 20;
    double spatial_weight = 1.0;
    std::uint64_t seed = 0;
};

struct TrainFlags {
    std::string data;
    std::string out;
    std::string method = "baseline";
    int holdout = 0;
    double delta = 2.0;
    int points = 10;
    int regions_sampled = 5;
    double attack_prob = 1.0;
    int epochs = 50;
    int batch = 8;
    double lr = 0.01;
    double momentum = 0.9;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct EvalFlags {
    std::string data;
    std::string ckpt;
    std::string report;
    int holdout = 0;
};

struct LodoFlags {
    std::string data;
    std::string out;
    std::vector<std::uint64_t> seeds{0, 1, 2};
    double delta = 2.0;
    int points = 10;
    int regions_sampled = 5;
    int epochs = 50;
    int batch = 8;
    double lr = 0.01;
    double momentum = 0.9;
    int threads = 1;
};

struct DemoFlags {
    std::string data;
    std::string sample;
    std::string ckpt;
    std::string out;
    double delta = 2.0;
    int points = 10;
    int regions_sampled = 5;
    int k = 20;
    double spatial_weight = 1.0;
    std::uint64_t seed = 0;
};

struct GradFlags {
    int trials = 100;
    std::uint64_t seed = 0;
};

Dataset load_data_dir(const std::string& dir) {
    return load_dataset((fs::path(dir) / "manifest.csv").string());
}

int cmd_gen_data(const GenFlags& f) {
    GenConfig cfg;
    cfg.n_domains = f.domains;
    cfg.per_domain = f.per_domain;
    cfg.size = f.size;
    cfg.seed = f.seed;
    generate_dataset(cfg, f.out);
    std::printf("%s\n", (fs::path(f.out) / "manifest.csv").string().c_str());
    return 0;
}

int cmd_precompute_masks(const MaskFlags& f) {
    const std::string manifest = (fs::path(f.data) / "manifest.csv").string();
    const auto entries = read_manifest(manifest);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        fs::path p(e.path);
        if (p.is_relative()) {
            p = fs::path(f.data) / p;
        }
        Sample s = load_sample(p.string());
        s.sample_id = e.sample_id;
        s.domain_id = e.domain_id;
        s.region_labels = compute_region_labels(
            s.image, f.k, f.spatial_weight, mix_seed({f.seed, kStreamRegion, i}));
        save_sample(p.string(), s);
    }
    std::printf("labeled %zu samples with %d regions each\n", entries.size(), f.k);
    return 0;
}

TrainConfig to_train_config(const TrainFlags& f) {
    TrainConfig cfg;
    cfg.epochs = f.epochs;
    cfg.batch_size = f.batch;
    cfg.lr_base = f.lr;
    cfg.momentum = f.momentum;
    cfg.method = parse_method(f.method);
    cfg.attack.delta = f.delta;
    cfg.attack.n_points = f.points;
    cfg.attack.regions_sampled = f.regions_sampled;
    cfg.attack.attack_prob = f.attack_prob;
    cfg.seed = f.seed;
    cfg.holdout_domain = f.holdout;
    cfg.threads = f.threads;
    return cfg;
}

int cmd_train(const TrainFlags& f) {
    const TrainConfig cfg = to_train_config(f);
    const Dataset ds = load_data_dir(f.data);
    const TrainOutput out = train(ds, cfg);
    save_run(f.out, cfg, out);

    double dice_sum = 0.0;
    for (const auto& a : out.report.holdout_agg) {
        dice_sum += a.mean_dice;
    }
    const double mean_dice =
        out.report.holdout_agg.empty() ? 0.0 : dice_sum / out.report.holdout_agg.size();
    std::printf("method=%s holdout=%d final_loss=%.17g holdout_mean_dice=%.9g wall_s=%.1f\n",
                method_name(cfg.method), cfg.holdout_domain, out.report.epoch_loss.back(),
                mean_dice, out.report.wall_seconds);
    std::printf("%s\n", f.out.c_str());
    return 0;
}

int cmd_eval(const EvalFlags& f) {
    const Dataset ds = load_data_dir(f.data);
    const Checkpoint ck = load_checkpoint(f.ckpt);
    if (ds.indices_for_domain(f.holdout).empty()) {
        throw std::runtime_error("holdout domain has no samples");
    }
    auto [rows, agg] = evaluate_domain(ck.net, ds, f.holdout);
    write_report_csv(f.report, f.holdout, rows, agg);

    double dice_sum = 0.0;
    for (const auto& a : agg) {
        dice_sum += a.mean_dice;
    }
    std::printf("holdout=%d samples=%zu mean_dice=%.9g\n", f.holdout,
                rows.size() / (agg.empty() ? 1 : agg.size()),
                agg.empty() ? 0.0 : dice_sum / agg.size());
    std::printf("%s\n", f.report.c_str());
    return 0;
}

int cmd_lodo(const LodoFlags& f) {
    const Dataset ds = load_data_dir(f.data);
    LodoConfig lcfg;
    lcfg.base.epochs = f.epochs;
    lcfg.base.batch_size = f.batch;
    lcfg.base.lr_base = f.lr;
    lcfg.base.momentum = f.momentum;
    lcfg.base.attack.delta = f.delta;
    lcfg.base.attack.n_points = f.points;
    lcfg.base.attack.regions_sampled = f.regions_sampled;
    lcfg.base.threads = f.threads;
    lcfg.seeds = f.seeds;
    lcfg.out_dir = f.out;
    const LodoSummary summary = run_lodo(ds, lcfg);
    fs::create_directories(f.out);
    const std::string path = (fs::path(f.out) / "summary.csv").string();
    write_summary_csv(path, summary);
    std::printf("baseline overall_dice=%.9g\n", overall_dice(summary, Method::baseline));
    std::printf("adverin overall_dice=%.9g\n", overall_dice(summary, Method::adverin));
    std::printf("%s\n", path.c_str());
    return 0;
}

int cmd_attack_demo(const DemoFlags& f) {
    const std::string manifest = (fs::path(f.data) / "manifest.csv").string();
    const auto entries = read_manifest(manifest);
    std::size_t idx = entries.size();
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].sample_id == f.sample) {
            idx = i;
            break;
        }
    }
    if (idx == entries.size()) {
        throw std::runtime_error("sample id '" + f.sample + "' not in manifest");
    }
    fs::path p(entries[idx].path);
    if (p.is_relative()) {
        p = fs::path(f.data) / p;
    }
    Sample s = load_sample(p.string());
    s.sample_id = entries[idx].sample_id;
    s.domain_id = entries[idx].domain_id;
    if (!s.region_labels) {
        log_info("sample has no region labels, clustering now (k=%d)", f.k);
        s.region_labels = compute_region_labels(
            s.image, f.k, f.spatial_weight, mix_seed({f.seed, kStreamRegion, idx}));
    }

    const Checkpoint ck = load_checkpoint(f.ckpt);
    AttackConfig cfg;
    cfg.delta = f.delta;
    cfg.n_points = f.points;
    cfg.regions_sampled = f.regions_sampled;
    Rng rng(mix_seed({f.seed, kStreamAttack}));
    const AttackResult res = attack(ck.net, s, cfg, rng);
    const Image2D attacked = apply_attack(s, res);

    fs::create_directories(f.out);
    Sample out_sample = s;
    out_sample.image = attacked;
    save_sample((fs::path(f.out) / "attacked.bin").string(), out_sample);

    std::vector<double> mask_vals(res.mask.data.begin(), res.mask.data.end());
    write_container((fs::path(f.out) / "mask.bin").string(),
                    {{"mask",
                      {static_cast<std::uint32_t>(res.mask.height),
                       static_cast<std::uint32_t>(res.mask.width)},
                      mask_vals}});

    const IntensityMapper mapper = res.attacked ? IntensityMapper::from_rho(res.rho_hat)
                                                : IntensityMapper::identity(f.points);
    const MappingCurve c = curve(mapper);
    {
        std::FILE* out = std::fopen((fs::path(f.out) / "curve.csv").string().c_str(), "wb");
        if (out == nullptr) {
            throw std::runtime_error("cannot open curve.csv for writing");
        }
        std::fprintf(out, "t,knot\n");
        for (int i = 0; i <= mapper.n; ++i) {
            std::fprintf(out, "%.17g,%.17g\n", static_cast<double>(i) / mapper.n, c.knots[i]);
        }
        std::fclose(out);
    }

    const double loss_after = loss_probe(ck.net, attacked, s.truth).loss;
    {
        std::FILE* out = std::fopen((fs::path(f.out) / "loss.txt").string().c_str(), "wb");
        if (out == nullptr) {
            throw std::runtime_error("cannot open loss.txt for writing");
        }
        std::fprintf(out, "loss_before=%.17g\nloss_after=%.17g\npredicted_increase=%.17g\n",
                     res.loss_before, loss_after, res.predicted_increase);
        std::fclose(out);
    }

    std::printf("loss_before=%.9g loss_after=%.9g predicted_increase=%.9g\n", res.loss_before,
                loss_after, res.predicted_increase);
    std::printf("%s\n", f.out.c_str());
    return 0;
}

int cmd_gradcheck(const GradFlags& f) {
    const GradCheckReport r = run_gradcheck(f.trials, f.seed);
    std::printf("curve cases=%d max_rel_err=%.3g\n", r.curve_cases, r.max_err_curve);
    std::printf("net cases=%d max_rel_err theta=%.3g input=%.3g\n", r.net_cases,
                r.max_err_theta, r.max_err_input);
    std::printf("rho cases=%d max_rel_err=%.3g max_abs_g0=%.3g\n", r.rho_cases, r.max_err_rho,
                r.max_abs_g0);
    std::printf("probes=%ld skipped=%ld\n", r.probes_total, r.probes_skipped);
    if (!r.pass()) {
        std::printf("gradcheck FAIL\n");
        return 1;
    }
    std::printf("gradcheck PASS\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adversarial intensity-attack training for synthetic multi-domain "
                 "segmentation"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Config file of key = value lines; flags override");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.set_version_flag("--version", "0.1.0");

    GenFlags gen;
    auto* sub_gen = app.add_subcommand("gen-data", "Generate the synthetic multi-domain dataset");
    sub_gen->add_option("--out", gen.out, "Output directory")->required();
    sub_gen->add_option("--domains", gen.domains, "Number of domains (1-8)");
    sub_gen->add_option("--per-domain", gen.per_domain, "Samples per domain");
    sub_gen->add_option("--size", gen.size, "Image height/width (even)");
    sub_gen->add_option("--seed", gen.seed, "Generator seed");

    MaskFlags mask;
    auto* sub_mask = app.add_subcommand("precompute-masks",
                                        "Cluster every sample into attack regions");
    sub_mask->add_option("--data", mask.data, "Dataset directory")->required();
    sub_mask->add_option("--k", mask.k, "Regions per image");
    sub_mask->add_option("--spatial-weight", mask.spatial_weight,
                         "Weight of row/col features vs intensity");
    sub_mask->add_option("--seed", mask.seed, "Clustering seed");

    TrainFlags tr;
    auto* sub_train = app.add_subcommand("train", "Train one model on all but one domain");
    sub_train->add_option("--data", tr.data, "Dataset directory")->required();
    sub_train->add_option("--out", tr.out, "Run output directory")->required();
    sub_train->add_option("--holdout", tr.holdout, "Held-out domain id")->required();
    sub_train->add_option("--method", tr.method, "baseline or adverin");
    sub_train->add_option("--delta", tr.delta, "Attack step size (L2 norm of rho)");
    sub_train->add_option("--points", tr.points, "Mapping points n");
    sub_train->add_option("--regions-sampled", tr.regions_sampled,
                          "Regions per attack mask");
    sub_train->add_option("--attack-prob", tr.attack_prob,
                          "Probability a training step is attacked");
    sub_train->add_option("--epochs", tr.epochs, "Training epochs");
    sub_train->add_option("--batch", tr.batch, "Batch size");
    sub_train->add_option("--lr", tr.lr, "Base learning rate");
    sub_train->add_option("--momentum", tr.momentum, "SGD momentum");
    sub_train->add_option("--seed", tr.seed, "Training seed");
    sub_train->add_option("--threads", tr.threads, "Worker threads (1 = reference)");

    EvalFlags ev;
    auto* sub_eval = app.add_subcommand("eval", "Evaluate a checkpoint on one domain");
    sub_eval->add_option("--data", ev.data, "Dataset directory")->required();
    sub_eval->add_option("--ckpt", ev.ckpt, "Checkpoint file")->required();
    sub_eval->add_option("--holdout", ev.holdout, "Domain id to evaluate")->required();
    sub_eval->add_option("--report", ev.report, "Report CSV path")->required();

    LodoFlags lo;
    auto* sub_lodo = app.add_subcommand(
        "lodo", "Leave-one-domain-out comparison of baseline and adverin");
    sub_lodo->add_option("--data", lo.data, "Dataset directory")->required();
    sub_lodo->add_option("--out", lo.out, "Output directory")->required();
    sub_lodo->add_option("--seeds", lo.seeds, "Comma-separated training seeds")
        ->delimiter(',');
    sub_lodo->add_option("--delta", lo.delta, "Attack step size");
    sub_lodo->add_option("--points", lo.points, "Mapping points n");
    sub_lodo->add_option("--regions-sampled", lo.regions_sampled, "Regions per attack mask");
    sub_lodo->add_option("--epochs", lo.epochs, "Training epochs");
    sub_lodo->add_option("--batch", lo.batch, "Batch size");
    sub_lodo->add_option("--lr", lo.lr, "Base learning rate");
    sub_lodo->add_option("--momentum", lo.momentum, "SGD momentum");
    sub_lodo->add_option("--threads", lo.threads, "Worker threads (1 = reference)");

    DemoFlags de;
    auto* sub_demo = app.add_subcommand("attack-demo",
                                        "Attack one sample and dump image, mask and curve");
    sub_demo->add_option("--data", de.data, "Dataset directory")->required();
    sub_demo->add_option("--sample", de.sample, "Sample id")->required();
    sub_demo->add_option("--ckpt", de.ckpt, "Checkpoint file")->required();
    sub_demo->add_option("--out", de.out, "Output directory")->required();
    sub_demo->add_option("--delta", de.delta, "Attack step size");
    sub_demo->add_option("--points", de.points, "Mapping points n");
    sub_demo->add_option("--regions-sampled", de.regions_sampled, "Regions per attack mask");
    sub_demo->add_option("--k", de.k, "Regions if labels must be computed");
    sub_demo->add_option("--spatial-weight", de.spatial_weight,
                         "Weight of row/col features vs intensity");
    sub_demo->add_option("--seed", de.seed, "Attack seed");

    GradFlags gc;
    auto* sub_grad = app.add_subcommand("gradcheck",
                                        "Finite-difference audit of all gradients");
    sub_grad->add_option("--trials", gc.trials, "Cases per gradient family");
    sub_grad->add_option("--seed", gc.seed, "Fuzzing seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(sub_gen)) return cmd_gen_data(gen);
        if (app.got_subcommand(sub_mask)) return cmd_precompute_masks(mask);
        if (app.got_subcommand(sub_train)) return cmd_train(tr);
        if (app.got_subcommand(sub_eval)) return cmd_eval(ev);
        if (app.got_subcommand(sub_lodo)) return cmd_lodo(lo);
        if (app.got_subcommand(sub_demo)) return cmd_attack_demo(de);
        if (app.got_subcommand(sub_grad)) return cmd_gradcheck(gc);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
