#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "adverin/attack.hpp"
#include "adverin/dataset.hpp"
#include "adverin/metrics.hpp"
#include "adverin/segnet.hpp"

namespace adverin {

enum class Method { baseline, adverin };

const char* method_name(Method m);
Method parse_method(const std::string& name);

struct TrainConfig {
    int epochs = 50;
    int batch_size = 8;
    double lr_base = 0.01;
    double momentum = 0.9;
    Method method = Method::baseline;
    AttackConfig attack;
    std::uint64_t seed = 0;
    int holdout_domain = 0;
    int threads = 1;
};

struct CaseRow {
    std::string sample_id;
    int cls = 0;
    double dice = 0.0;
    double hd95 = 0.0;
    MaskFlag flag = MaskFlag::ok;
};

struct ClassAggregate {
    int cls = 0;
    double mean_dice = 0.0;
    double mean_hd95 = 0.0;
    int count = 0;
};

struct RunReport {
    std::vector<double> epoch_loss;
    std::vector<std::string> train_ids;
    std::vector<CaseRow> holdout_rows;
    std::vector<ClassAggregate> holdout_agg;
    double wall_seconds = 0.0;
};

struct TrainOutput {
    SegNet net;
    RunReport report;
};

// lr_base * 0.5 * (1 + cos(pi * epoch / total)), stepped once per epoch.
double cosine_lr(double lr_base, int epoch, int total);

// SGD + momentum over every sample outside the holdout domain, shuffled
// per epoch. method adverin feeds each step the attacked image instead.
// Bitwise deterministic for a given config at any thread count.
TrainOutput train(const Dataset& ds, const TrainConfig& cfg);

std::pair<std::vector<CaseRow>, std::vector<ClassAggregate>> evaluate_domain(
    const SegNet& net, const Dataset& ds, int domain_id, double threshold = 0.5);

void write_loss_csv(const std::string& path, const std::vector<double>& epoch_loss);
void write_report_csv(const std::string& path, int holdout_domain,
                      const std::vector<CaseRow>& rows,
                      const std::vector<ClassAggregate>& agg);

// checkpoint.adin + loss.csv + report.csv under dir.
void save_run(const std::string& dir, const TrainConfig& cfg, const TrainOutput& out);

struct LodoCell {
    Method method = Method::baseline;
    int holdout = 0;
    int cls = 0;
    double mean_dice = 0.0;  // averaged over seeds
    double mean_hd95 = 0.0;
};

struct LodoSummary {
    std::vector<LodoCell> cells;
    std::vector<std::uint64_t> seeds;
};

struct LodoConfig {
    TrainConfig base;  // method, holdout and seed overwritten per run
    std::vector<std::uint64_t> seeds{0, 1, 2};
    std::string out_dir;  // when set, every run is saved under it
    bool run_baseline = true;
    bool run_adverin = true;
};

LodoSummary run_lodo(const Dataset& ds, const LodoConfig& cfg);

// Unweighted mean over the (holdout domain x class) cells.
double overall_dice(const LodoSummary& s, Method m);
double domain_dice(const LodoSummary& s, Method m, int holdout);

void write_summary_csv(const std::string& path, const LodoSummary& s);

}  // namespace adverin
