#include "adverin/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "adverin/log.hpp"
#include "adverin/rng.hpp"

namespace adverin {

namespace {

void add_params(NetParams& acc, const NetParams& g) {
    const std::vector<double>* src[10];
    std::vector<double>* dst[10];
    int si = 0, di = 0;
    g.for_each_tensor([&](const std::vector<double>& t) { src[si++] = &t; });
    acc.for_each_tensor([&](std::vector<double>& t) { dst[di++] = &t; });
    for (int k = 0; k < 10; ++k) {
        for (std::size_t i = 0; i < dst[k]->size(); ++i) {
            (*dst[k])[i] += (*src[k])[i];
        }
    }
}

void scale_params(NetParams& p, double s) {
    p.for_each_tensor([s](std::vector<double>& t) {
        for (double& v : t) {
            v *= s;
        }
    });
}

std::string fmt_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_g9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    return out;
}

}  // namespace

const char* method_name(Method m) {
    return m == Method::baseline ? "baseline" : "adverin";
}

Method parse_method(const std::string& name) {
    if (name == "baseline") {
        return Method::baseline;
    }
    if (name == "adverin") {
        return Method::adverin;
    }
    throw std::invalid_argument("unknown method '" + name + "'");
}

double cosine_lr(double lr_base, int epoch, int total) {
    if (total < 1 || epoch < 0 || epoch > total) {
        throw std::invalid_argument("cosine_lr: epoch outside [0, total]");
    }
    return lr_base * 0.5 * (1.0 + std::cos(std::numbers::pi * epoch / total));
}

TrainOutput train(const Dataset& ds, const TrainConfig& cfg) {
    if (cfg.epochs < 1 || cfg.batch_size < 1 || !(cfg.lr_base > 0.0)) {
        throw std::invalid_argument("train: bad config");
    }
    const auto train_idx = ds.indices_excluding_domain(cfg.holdout_domain);
    const auto holdout_idx = ds.indices_for_domain(cfg.holdout_domain);
    if (train_idx.empty()) {
        throw std::runtime_error("train: training split is empty");
    }
    if (holdout_idx.empty()) {
        throw std::runtime_error("train: holdout domain has no samples");
    }
    const int channels = ds.samples[train_idx[0]].truth.channels;
    for (const auto& s : ds.samples) {
        if (s.truth.channels != channels) {
            throw std::runtime_error("train: inconsistent channel counts");
        }
    }

    const auto start = std::chrono::steady_clock::now();

    Rng init_rng(mix_seed({cfg.seed, kStreamInit}));
    TrainOutput out;
    out.net = init_segnet(init_rng, channels);
    NetParams velocity = zeros_like(out.net);

    out.report.train_ids.reserve(train_idx.size());
    for (auto i : train_idx) {
        out.report.train_ids.push_back(ds.samples[i].sample_id);
    }

    const bool attacking = cfg.method == Method::adverin && cfg.attack.enabled;
    Rng shuffle_rng(mix_seed({cfg.seed, kStreamShuffle}));
    const std::size_t n = train_idx.size();
    const int nthreads = std::max(1, std::min<int>(cfg.threads, cfg.batch_size));

    std::vector<LossGrads> batch_grads(cfg.batch_size);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cosine_lr(cfg.lr_base, epoch, cfg.epochs);
        const auto order = shuffle_rng.choice_k(n, n);
        double loss_sum = 0.0;
        for (std::size_t batch_start = 0; batch_start < n; batch_start += cfg.batch_size) {
            const std::size_t batch_n = std::min<std::size_t>(cfg.batch_size, n - batch_start);

            auto work = [&](std::size_t first, std::size_t stride) {
                for (std::size_t bi = first; bi < batch_n; bi += stride) {
                    const std::size_t pos = batch_start + bi;
                    const Sample& s = ds.samples[train_idx[order[pos]]];
                    if (attacking) {
                        Rng attack_rng(mix_seed({cfg.seed, kStreamAttack,
                                                 static_cast<std::uint64_t>(epoch),
                                                 static_cast<std::uint64_t>(pos)}));
                        const Image2D x = adverin_example(out.net, s, cfg.attack, attack_rng);
                        batch_grads[bi] = loss_and_grads(out.net, x, s.truth);
                    } else {
                        batch_grads[bi] = loss_and_grads(out.net, s.image, s.truth);
                    }
                }
            };
            if (nthreads == 1 || batch_n == 1) {
                work(0, 1);
            } else {
                std::vector<std::thread> pool;
                pool.reserve(nthreads);
                for (int t = 0; t < nthreads; ++t) {
                    pool.emplace_back(work, static_cast<std::size_t>(t),
                                      static_cast<std::size_t>(nthreads));
                }
                for (auto& t : pool) {
                    t.join();
                }
            }

            NetParams grad = zeros_like(out.net);
            for (std::size_t bi = 0; bi < batch_n; ++bi) {
                add_params(grad, batch_grads[bi].d_theta);
                loss_sum += batch_grads[bi].loss;
            }
            scale_params(grad, 1.0 / static_cast<double>(batch_n));
            sgd_update(out.net, grad, lr, cfg.momentum, velocity);
        }
        const double mean_loss = loss_sum / static_cast<double>(n);
        if (!std::isfinite(mean_loss)) {
            throw std::runtime_error("train: loss diverged");
        }
        out.report.epoch_loss.push_back(mean_loss);
        log_debug("epoch %d/%d lr=%.6f loss=%.6f", epoch + 1, cfg.epochs, lr, mean_loss);
    }

    auto [rows, agg] = evaluate_domain(out.net, ds, cfg.holdout_domain);
    out.report.holdout_rows = std::move(rows);
    out.report.holdout_agg = std::move(agg);

    out.report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

std::pair<std::vector<CaseRow>, std::vector<ClassAggregate>> evaluate_domain(
    const SegNet& net, const Dataset& ds, int domain_id, double threshold) {
    std::vector<CaseRow> rows;
    std::vector<ClassAggregate> agg(static_cast<std::size_t>(net.channels));
    for (int c = 0; c < net.channels; ++c) {
        agg[c].cls = c;
    }
    for (auto i : ds.indices_for_domain(domain_id)) {
        const Sample& s = ds.samples[i];
        const CaseMetrics cm = evaluate_case(net, s, threshold);
        for (int c = 0; c < net.channels; ++c) {
            const auto& m = cm.per_class[c];
            rows.push_back({s.sample_id, c, m.dice, m.hd95, m.flag});
            agg[c].mean_dice += m.dice;
            agg[c].mean_hd95 += m.hd95;
            agg[c].count += 1;
        }
    }
    for (auto& a : agg) {
        if (a.count > 0) {
            a.mean_dice /= a.count;
            a.mean_hd95 /= a.count;
        }
    }
    return {std::move(rows), std::move(agg)};
}

void write_loss_csv(const std::string& path, const std::vector<double>& epoch_loss) {
    auto out = open_out(path);
    out << "epoch,mean_loss\n";
    for (std::size_t e = 0; e < epoch_loss.size(); ++e) {
        out << e << ',' << fmt_g17(epoch_loss[e]) << '\n';
    }
    if (!out.flush()) {
        throw std::runtime_error("failed writing '" + path + "'");
    }
}

void write_report_csv(const std::string& path, int holdout_domain,
                      const std::vector<CaseRow>& rows,
                      const std::vector<ClassAggregate>& agg) {
    auto out = open_out(path);
    out << "holdout_domain,sample_id,class,dice,hd95,flag\n";
    for (const auto& r : rows) {
        out << holdout_domain << ',' << r.sample_id << ',' << r.cls << ',' << fmt_g9(r.dice)
            << ',' << fmt_g9(r.hd95) << ',' << flag_name(r.flag) << '\n';
    }
    double dice_sum = 0.0, hd_sum = 0.0;
    for (const auto& a : agg) {
        out << holdout_domain << ",mean," << a.cls << ',' << fmt_g9(a.mean_dice) << ','
            << fmt_g9(a.mean_hd95) << ",-\n";
        dice_sum += a.mean_dice;
        hd_sum += a.mean_hd95;
    }
    if (!agg.empty()) {
        out << holdout_domain << ",mean,all," << fmt_g9(dice_sum / agg.size()) << ','
            << fmt_g9(hd_sum / agg.size()) << ",-\n";
    }
    if (!out.flush()) {
        throw std::runtime_error("failed writing '" + path + "'");
    }
}

void save_run(const std::string& dir, const TrainConfig& cfg, const TrainOutput& out) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);
    save_checkpoint((base / "checkpoint.adin").string(), out.net, cfg.attack.n_points,
                    cfg.method == Method::adverin ? cfg.attack.delta : 0.0);
    write_loss_csv((base / "loss.csv").string(), out.report.epoch_loss);
    write_report_csv((base / "report.csv").string(), cfg.holdout_domain,
                     out.report.holdout_rows, out.report.holdout_agg);
}

LodoSummary run_lodo(const Dataset& ds, const LodoConfig& cfg) {
    const int domains = ds.domain_count();
    if (domains < 2) {
        throw std::runtime_error("run_lodo: need at least 2 domains");
    }
    if (cfg.seeds.empty()) {
        throw std::invalid_argument("run_lodo: need at least one seed");
    }
    std::vector<Method> methods;
    if (cfg.run_baseline) {
        methods.push_back(Method::baseline);
    }
    if (cfg.run_adverin) {
        methods.push_back(Method::adverin);
    }

    LodoSummary summary;
    summary.seeds = cfg.seeds;
    for (const Method m : methods) {
        for (int d = 0; d < domains; ++d) {
            std::vector<LodoCell> cells;
            for (const std::uint64_t seed : cfg.seeds) {
                TrainConfig run_cfg = cfg.base;
                run_cfg.method = m;
                run_cfg.holdout_domain = d;
                run_cfg.seed = seed;
                log_info("lodo: method=%s holdout=%d seed=%llu", method_name(m), d,
                         static_cast<unsigned long long>(seed));
                const TrainOutput out = train(ds, run_cfg);
                if (!cfg.out_dir.empty()) {
                    const auto run_dir = std::filesystem::path(cfg.out_dir) / method_name(m) /
                                         ("h" + std::to_string(d)) /
                                         ("s" + std::to_string(seed));
                    save_run(run_dir.string(), run_cfg, out);
                }
                if (cells.empty()) {
                    for (const auto& a : out.report.holdout_agg) {
                        cells.push_back({m, d, a.cls, 0.0, 0.0});
                    }
                }
                for (std::size_t c = 0; c < out.report.holdout_agg.size(); ++c) {
                    cells[c].mean_dice += out.report.holdout_agg[c].mean_dice;
                    cells[c].mean_hd95 += out.report.holdout_agg[c].mean_hd95;
                }
            }
            for (auto& cell : cells) {
                cell.mean_dice /= static_cast<double>(cfg.seeds.size());
                cell.mean_hd95 /= static_cast<double>(cfg.seeds.size());
                summary.cells.push_back(cell);
            }
        }
    }
    return summary;
}

double overall_dice(const LodoSummary& s, Method m) {
    double sum = 0.0;
    int n = 0;
    for (const auto& c : s.cells) {
        if (c.method == m) {
            sum += c.mean_dice;
            ++n;
        }
    }
    return n > 0 ? sum / n : 0.0;
}

double domain_dice(const LodoSummary& s, Method m, int holdout) {
    double sum = 0.0;
    int n = 0;
    for (const auto& c : s.cells) {
        if (c.method == m && c.holdout == holdout) {
            sum += c.mean_dice;
            ++n;
        }
    }
    return n > 0 ? sum / n : 0.0;
}

void write_summary_csv(const std::string& path, const LodoSummary& s) {
    auto out = open_out(path);
    out << "method,holdout_domain,class,mean_dice,mean_hd95\n";
    for (const Method m : {Method::baseline, Method::adverin}) {
        bool any = false;
        std::vector<int> domains;
        for (const auto& c : s.cells) {
            if (c.method != m) {
                continue;
            }
            any = true;
            out << method_name(m) << ',' << c.holdout << ',' << c.cls << ','
                << fmt_g9(c.mean_dice) << ',' << fmt_g9(c.mean_hd95) << '\n';
            if (domains.empty() || domains.back() != c.holdout) {
                domains.push_back(c.holdout);
            }
        }
        if (!any) {
            continue;
        }
        for (int d : domains) {
            double dice_sum = 0.0, hd_sum = 0.0;
            int n = 0;
            for (const auto& c : s.cells) {
                if (c.method == m && c.holdout == d) {
                    dice_sum += c.mean_dice;
                    hd_sum += c.mean_hd95;
                    ++n;
                }
            }
            out << method_name(m) << ',' << d << ",all," << fmt_g9(dice_sum / n) << ','
                << fmt_g9(hd_sum / n) << '\n';
        }
        double dice_sum = 0.0, hd_sum = 0.0;
        int n = 0;
        for (const auto& c : s.cells) {
            if (c.method == m) {
                dice_sum += c.mean_dice;
                hd_sum += c.mean_hd95;
                ++n;
            }
        }
        out << method_name(m) << ",all,all," << fmt_g9(dice_sum / n) << ','
            << fmt_g9(hd_sum / n) << '\n';
    }
    if (!out.flush()) {
        throw std::runtime_error("failed writing '" + path + "'");
    }
}

}  // namespace adverin
