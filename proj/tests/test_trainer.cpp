#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "adverin/region_mask.hpp"
#include "adverin/rng.hpp"
#include "adverin/synthdata.hpp"
#include "adverin/trainer.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace adverin;
using testutil::TempDir;
namespace fs = std::filesystem;

namespace {

// Tiny in-memory dataset: 4 domains x 6 samples at 16x16, region labels attached.
Dataset tiny_dataset() {
    Dataset ds;
    const auto styles = builtin_styles(4);
    Rng rng(1000);
    for (int d = 0; d < 4; ++d) {
        for (int i = 0; i < 6; ++i) {
            Sample s = generate_sample(styles[d], 16, rng);
            s.domain_id = d;
            s.sample_id = "d" + std::to_string(d) + "_s" + std::to_string(i);
            s.region_labels = compute_region_labels(s.image, 6, 1.0, rng.next_u64());
            ds.samples.push_back(std::move(s));
        }
    }
    return ds;
}

TrainConfig tiny_config(Method m) {
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 4;
    cfg.method = m;
    cfg.attack.regions_total = 6;
    cfg.attack.regions_sampled = 2;
    cfg.holdout_domain = 0;
    return cfg;
}

bool params_equal(const SegNet& a, const SegNet& b) {
    bool equal = true;
    std::vector<const std::vector<double>*> ta, tb;
    a.params.for_each_tensor([&](const std::vector<double>& t) { ta.push_back(&t); });
    b.params.for_each_tensor([&](const std::vector<double>& t) { tb.push_back(&t); });
    for (std::size_t i = 0; i < ta.size(); ++i) {
        equal = equal && (*ta[i] == *tb[i]);
    }
    return equal;
}

}  // namespace

TEST_CASE("cosine schedule hits its endpoints exactly") {
    CHECK(cosine_lr(0.01, 0, 50) == 0.01);
    CHECK(cosine_lr(0.01, 50, 50) == 0.0);
    CHECK(cosine_lr(0.01, 25, 50) == doctest::Approx(0.005).epsilon(1e-12));
    CHECK(cosine_lr(0.01, 10, 50) > cosine_lr(0.01, 40, 50));
}

TEST_CASE("method names parse both ways") {
    CHECK(parse_method("baseline") == Method::baseline);
    CHECK(parse_method("adverin") == Method::adverin);
    CHECK(method_name(Method::adverin) == std::string("adverin"));
    CHECK_THROWS_AS(parse_method("augmix"), std::invalid_argument);
}

TEST_CASE("training is deterministic and never touches the holdout domain") {
    const Dataset ds = tiny_dataset();
    const TrainConfig cfg = tiny_config(Method::baseline);
    const TrainOutput a = train(ds, cfg);
    const TrainOutput b = train(ds, cfg);

    CHECK(params_equal(a.net, b.net));
    CHECK(a.report.epoch_loss == b.report.epoch_loss);
    REQUIRE(a.report.epoch_loss.size() == 3);

    std::set<std::string> train_ids(a.report.train_ids.begin(), a.report.train_ids.end());
    CHECK(train_ids.size() == 18);
    for (const CaseRow& row : a.report.holdout_rows) {
        CHECK(train_ids.count(row.sample_id) == 0);
    }
    // Every holdout sample appears once per class.
    CHECK(a.report.holdout_rows.size() == 6 * 2);
    REQUIRE(a.report.holdout_agg.size() == 2);
    CHECK(a.report.holdout_agg[0].count == 6);

    // The loss actually moves downward on this easy problem.
    CHECK(a.report.epoch_loss.back() < a.report.epoch_loss.front());
}

TEST_CASE("a disabled attack collapses the adversarial run onto the baseline") {
    const Dataset ds = tiny_dataset();
    const TrainConfig base_cfg = tiny_config(Method::baseline);
    const TrainOutput base = train(ds, base_cfg);

    TrainConfig off = tiny_config(Method::adverin);
    off.attack.enabled = false;
    const TrainOutput same = train(ds, off);
    CHECK(params_equal(base.net, same.net));
    CHECK(base.report.epoch_loss == same.report.epoch_loss);

    TrainConfig zero = tiny_config(Method::adverin);
    zero.attack.delta = 0.0;
    const TrainOutput z = train(ds, zero);
    CHECK(params_equal(base.net, z.net));
    CHECK(base.report.epoch_loss == z.report.epoch_loss);

    // A live attack must actually change the trajectory.
    const TrainOutput adv = train(ds, tiny_config(Method::adverin));
    CHECK_FALSE(params_equal(base.net, adv.net));
    for (double l : adv.report.epoch_loss) {
        CHECK(std::isfinite(l));
    }
}

TEST_CASE("thread count does not change the result") {
    const Dataset ds = tiny_dataset();
    TrainConfig cfg = tiny_config(Method::adverin);
    const TrainOutput one = train(ds, cfg);
    cfg.threads = 4;
    const TrainOutput four = train(ds, cfg);
    CHECK(params_equal(one.net, four.net));
    CHECK(one.report.epoch_loss == four.report.epoch_loss);
}

TEST_CASE("degenerate configs are rejected") {
    const Dataset ds = tiny_dataset();
    TrainConfig cfg = tiny_config(Method::baseline);
    cfg.holdout_domain = 7;
    CHECK_THROWS_WITH_AS(train(ds, cfg), doctest::Contains("holdout domain"),
                         std::runtime_error);

    Dataset single;
    single.samples.push_back(ds.samples[0]);  // only domain 0 exists
    TrainConfig cfg2 = tiny_config(Method::baseline);
    cfg2.holdout_domain = 0;
    CHECK_THROWS_WITH_AS(train(single, cfg2), doctest::Contains("training split"),
                         std::runtime_error);

    TrainConfig bad = tiny_config(Method::baseline);
    bad.epochs = 0;
    CHECK_THROWS_AS(train(ds, bad), std::invalid_argument);
}

TEST_CASE("adverin training requires region labels on the training split") {
    Dataset ds = tiny_dataset();
    for (Sample& s : ds.samples) {
        s.region_labels.reset();
    }
    CHECK_THROWS_AS(train(ds, tiny_config(Method::adverin)), std::invalid_argument);
    // The baseline never samples masks, so it does not care.
    const TrainOutput out = train(ds, tiny_config(Method::baseline));
    CHECK(out.report.epoch_loss.size() == 3);
}

TEST_CASE("evaluation reports one row per holdout sample and class") {
    const Dataset ds = tiny_dataset();
    Rng rng(55);
    const SegNet net = init_segnet(rng, 2);
    const auto [rows, agg] = evaluate_domain(net, ds, 2);
    REQUIRE(rows.size() == 12);
    REQUIRE(agg.size() == 2);
    double sum0 = 0.0;
    int n0 = 0;
    for (const CaseRow& r : rows) {
        if (r.cls == 0) {
            sum0 += r.dice;
            ++n0;
        }
    }
    REQUIRE(n0 == 6);
    CHECK(agg[0].mean_dice == doctest::Approx(sum0 / 6.0).epsilon(1e-12));
    CHECK(agg[0].count == 6);
}

TEST_CASE("run artifacts land on disk and parse back") {
    TempDir tmp("run");
    const Dataset ds = tiny_dataset();
    const TrainConfig cfg = tiny_config(Method::baseline);
    const TrainOutput out = train(ds, cfg);
    save_run(tmp.str("r0"), cfg, out);

    CHECK(fs::exists(tmp.str("r0/checkpoint.adin")));
    CHECK(fs::exists(tmp.str("r0/loss.csv")));
    CHECK(fs::exists(tmp.str("r0/report.csv")));

    const Checkpoint ck = load_checkpoint(tmp.str("r0/checkpoint.adin"));
    CHECK(ck.net.channels == 2);
    CHECK(ck.n_points == cfg.attack.n_points);
    CHECK(ck.delta == 0.0);  // baseline runs advertise a zero attack step

    const std::string loss = testutil::slurp_text(tmp.str("r0/loss.csv"));
    CHECK(loss.rfind("epoch,mean_loss\n", 0) == 0);
    int lines = 0;
    for (char c : loss) {
        lines += c == '\n' ? 1 : 0;
    }
    CHECK(lines == 1 + 3);
    // Losses are printed with enough digits to round-trip exactly.
    const std::size_t comma = loss.find(',', loss.find('\n') + 1);
    const double first = std::stod(loss.substr(comma + 1));
    CHECK(first == out.report.epoch_loss[0]);

    const std::string report = testutil::slurp_text(tmp.str("r0/report.csv"));
    CHECK(report.rfind("holdout_domain,sample_id,class,dice,hd95,flag\n", 0) == 0);
    // 12 case rows + per-class means + the overall mean row.
    int rlines = 0;
    for (char c : report) {
        rlines += c == '\n' ? 1 : 0;
    }
    CHECK(rlines == 1 + 12 + 2 + 1);
    CHECK(report.find("0,mean,all,") != std::string::npos);
}

TEST_CASE("a tiny leave-one-domain-out sweep aggregates per-cell means") {
    TempDir tmp("lodo");
    const Dataset ds = tiny_dataset();
    LodoConfig cfg;
    cfg.base = tiny_config(Method::baseline);
    cfg.base.epochs = 2;
    cfg.seeds = {0};
    cfg.out_dir = tmp.str("runs");

    const LodoSummary s = run_lodo(ds, cfg);
    REQUIRE(s.cells.size() == 2 * 4 * 2);  // methods x holdouts x classes
    CHECK(s.seeds == std::vector<std::uint64_t>{0});

    // overall_dice is the plain mean over that method's cells.
    double mean = 0.0;
    int count = 0;
    for (const LodoCell& c : s.cells) {
        if (c.method == Method::adverin) {
            mean += c.mean_dice;
            ++count;
        }
    }
    REQUIRE(count == 8);
    CHECK(overall_dice(s, Method::adverin) == doctest::Approx(mean / 8.0).epsilon(1e-12));

    double h2 = 0.0;
    int c2 = 0;
    for (const LodoCell& c : s.cells) {
        if (c.method == Method::baseline && c.holdout == 2) {
            h2 += c.mean_dice;
            ++c2;
        }
    }
    REQUIRE(c2 == 2);
    CHECK(domain_dice(s, Method::baseline, 2) == doctest::Approx(h2 / 2.0).epsilon(1e-12));

    // Per-run artifacts are saved under out_dir.
    CHECK(fs::exists(tmp.str("runs/baseline/h0/s0/checkpoint.adin")));
    CHECK(fs::exists(tmp.str("runs/adverin/h3/s0/report.csv")));

    write_summary_csv(tmp.str("summary.csv"), s);
    const std::string text = testutil::slurp_text(tmp.str("summary.csv"));
    CHECK(text.rfind("method,holdout_domain,class,mean_dice,mean_hd95\n", 0) == 0);

    // Same sweep again is identical (summary written from identical cells).
    const LodoSummary s2 = run_lodo(ds, cfg);
    write_summary_csv(tmp.str("summary2.csv"), s2);
    CHECK(testutil::same_bytes(tmp.str("summary.csv"), tmp.str("summary2.csv")));
}
