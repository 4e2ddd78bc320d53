#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "adverin/container.hpp"
#include "adverin/dataset.hpp"
#include "adverin/rng.hpp"
#include "adverin/segnet.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace adverin;
using testutil::TempDir;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args, const std::string& capture = "/dev/null") {
    const std::string cmd =
        std::string(ADVERIN_CLI_PATH) + " " + args + " > " + capture + " 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

// Shared fixture: a tiny labeled dataset plus one trained baseline run.
struct CliWorld {
    TempDir tmp{"cli"};
    std::string data;
    std::string run;

    CliWorld() {
        data = tmp.str("data");
        REQUIRE(run_cli("gen-data --out " + data +
                        " --domains 2 --per-domain 2 --size 16 --seed 7") == 0);
        REQUIRE(run_cli("precompute-masks --data " + data + " --k 8 --seed 7") == 0);
        run = tmp.str("run");
        REQUIRE(run_cli("train --data " + data + " --out " + run +
                        " --holdout 0 --epochs 2 --batch 2 --seed 3") == 0);
    }
};

CliWorld& world() {
    static CliWorld w;
    return w;
}

}  // namespace

TEST_CASE("bad invocations exit 2, help and version exit 0") {
    CHECK(run_cli("") == 2);
    CHECK(run_cli("no-such-command") == 2);
    CHECK(run_cli("gen-data") == 2);  // missing required --out

    TempDir tmp("cliho");
    const std::string out = tmp.str("help.txt");
    CHECK(run_cli("--help", out) == 0);
    const std::string help = testutil::slurp_text(out);
    CHECK(help.find("gen-data") != std::string::npos);
    CHECK(help.find("lodo") != std::string::npos);

    CHECK(run_cli("--version", out) == 0);
    CHECK(testutil::slurp_text(out).find("0.1.0") != std::string::npos);
}

TEST_CASE("gen-data writes a loadable dataset and rejects odd sizes") {
    CliWorld& w = world();
    CHECK(fs::exists(w.data + "/manifest.csv"));
    const Dataset ds = load_dataset(w.data + "/manifest.csv");
    CHECK(ds.samples.size() == 4);
    CHECK(ds.domain_count() == 2);
    CHECK(ds.samples[0].image.height == 16);
    // Masks were precomputed in place.
    CHECK(ds.samples[0].region_labels.has_value());
    CHECK(ds.samples[0].region_labels->k == 8);

    TempDir tmp("gen2");
    const std::string err = tmp.str("err.txt");
    CHECK(run_cli("gen-data --out " + tmp.str("x") + " --size 15", err) == 2);
    CHECK(testutil::slurp_text(err).find("even") != std::string::npos);
}

TEST_CASE("identical seeds regenerate byte-identical files") {
    CliWorld& w = world();
    TempDir tmp("gen3");
    const std::string copy = tmp.str("copy");
    REQUIRE(run_cli("gen-data --out " + copy +
                    " --domains 2 --per-domain 2 --size 16 --seed 7") == 0);
    REQUIRE(run_cli("precompute-masks --data " + copy + " --k 8 --seed 7") == 0);
    CHECK(testutil::same_bytes(w.data + "/manifest.csv", copy + "/manifest.csv"));
    for (const ManifestEntry& e : read_manifest(copy + "/manifest.csv")) {
        CHECK(testutil::same_bytes(w.data + "/" + e.path, copy + "/" + e.path));
    }

    // Relabeling with the same parameters is idempotent.
    REQUIRE(run_cli("precompute-masks --data " + copy + " --k 8 --seed 7") == 0);
    for (const ManifestEntry& e : read_manifest(copy + "/manifest.csv")) {
        CHECK(testutil::same_bytes(w.data + "/" + e.path, copy + "/" + e.path));
    }

    CHECK(run_cli("precompute-masks --data " + tmp.str("missing")) == 1);
}

TEST_CASE("train writes run artifacts and reports its result line") {
    CliWorld& w = world();
    CHECK(fs::exists(w.run + "/checkpoint.adin"));
    CHECK(fs::exists(w.run + "/loss.csv"));
    CHECK(fs::exists(w.run + "/report.csv"));

    TempDir tmp("train2");
    const std::string out = tmp.str("stdout.txt");
    REQUIRE(run_cli("train --data " + w.data + " --out " + tmp.str("r") +
                        " --holdout 0 --epochs 2 --batch 2 --seed 3",
                    out) == 0);
    const std::string text = testutil::slurp_text(out);
    CHECK(text.find("method=baseline holdout=0 final_loss=") != std::string::npos);
    CHECK(text.find("wall_s=") != std::string::npos);
    // Same config, same trajectory.
    CHECK(testutil::same_bytes(w.run + "/loss.csv", tmp.str("r/loss.csv")));
    CHECK(testutil::same_bytes(w.run + "/checkpoint.adin", tmp.str("r/checkpoint.adin")));

    CHECK(run_cli("train --data " + w.data + " --out " + tmp.str("x") +
                  " --holdout 0 --method augmix") == 2);
    CHECK(run_cli("train --data " + tmp.str("nodir") + " --out " + tmp.str("x") +
                  " --holdout 0") == 1);
}

TEST_CASE("an adverin run with a zero step retraces the baseline") {
    CliWorld& w = world();
    TempDir tmp("train3");
    REQUIRE(run_cli("train --data " + w.data + " --out " + tmp.str("z") +
                    " --holdout 0 --epochs 2 --batch 2 --seed 3"
                    " --method adverin --delta 0") == 0);
    CHECK(testutil::same_bytes(w.run + "/loss.csv", tmp.str("z/loss.csv")));

    // A real step diverges.
    REQUIRE(run_cli("train --data " + w.data + " --out " + tmp.str("a") +
                    " --holdout 0 --epochs 2 --batch 2 --seed 3"
                    " --method adverin --delta 2 --regions-sampled 3") == 0);
    CHECK_FALSE(testutil::same_bytes(w.run + "/loss.csv", tmp.str("a/loss.csv")));
}

TEST_CASE("eval reproduces the training report for the same checkpoint") {
    CliWorld& w = world();
    TempDir tmp("eval");
    const std::string report = tmp.str("report.csv");
    const std::string out = tmp.str("stdout.txt");
    REQUIRE(run_cli("eval --data " + w.data + " --ckpt " + w.run +
                        "/checkpoint.adin --holdout 0 --report " + report,
                    out) == 0);
    CHECK(testutil::slurp_text(out).find("holdout=0") != std::string::npos);
    const std::string text = testutil::slurp_text(report);
    CHECK(text.rfind("holdout_domain,sample_id,class,dice,hd95,flag\n", 0) == 0);
    CHECK(text.find("d0_s000") != std::string::npos);
    CHECK(text.find("d1_s") == std::string::npos);  // other domain not evaluated

    CHECK(run_cli("eval --data " + w.data + " --ckpt " + tmp.str("no.adin") +
                  " --holdout 0 --report " + report) == 1);
    CHECK(run_cli("eval --data " + w.data + " --ckpt " + w.run +
                  "/checkpoint.adin --holdout 9 --report " + report) == 1);
}

TEST_CASE("eval flags empty-vs-empty predictions as perfect both_empty rows") {
    TempDir tmp("evalbg");
    // All-background truth and a net biased hard toward background.
    Rng rng(77);
    fs::create_directories(tmp.str("data"));
    Sample s;
    s.image.height = 8;
    s.image.width = 8;
    s.image.vmin = -1.0;
    s.image.vmax = 1.0;
    s.image.data.resize(64);
    for (double& v : s.image.data) {
        v = 2.0 * rng.uniform() - 1.0;
    }
    s.truth.channels = 2;
    s.truth.height = 8;
    s.truth.width = 8;
    s.truth.data.assign(128, 0.0);
    s.domain_id = 0;
    s.sample_id = "bg0";
    save_sample(tmp.str("data/bg0.adin"), s);
    write_manifest(tmp.str("data/manifest.csv"), {{"bg0", 0, "bg0.adin"}});

    SegNet net = init_segnet(rng, 2);
    net.params.for_each_tensor([](std::vector<double>& t) {
        std::fill(t.begin(), t.end(), 0.0);
    });
    net.params.head.b.assign(net.params.head.b.size(), -10.0);
    save_checkpoint(tmp.str("ckpt.adin"), net, 10, 0.0);

    const std::string report = tmp.str("report.csv");
    REQUIRE(run_cli("eval --data " + tmp.str("data") + " --ckpt " + tmp.str("ckpt.adin") +
                    " --holdout 0 --report " + report) == 0);
    const std::string text = testutil::slurp_text(report);
    CHECK(text.find("0,bg0,0,1,0,both_empty") != std::string::npos);
    CHECK(text.find("0,bg0,1,1,0,both_empty") != std::string::npos);
}

TEST_CASE("attack-demo dumps the attacked image, mask, curve, and losses") {
    CliWorld& w = world();
    TempDir tmp("demo");
    const std::string out = tmp.str("demo");
    REQUIRE(run_cli("attack-demo --data " + w.data + " --sample d1_s001 --ckpt " + w.run +
                    "/checkpoint.adin --out " + out + " --delta 2 --seed 5") == 0);
    REQUIRE(fs::exists(out + "/attacked.bin"));
    REQUIRE(fs::exists(out + "/mask.bin"));
    REQUIRE(fs::exists(out + "/curve.csv"));
    REQUIRE(fs::exists(out + "/loss.txt"));

    // Off-mask pixels survive the round trip bit-exactly.
    const Dataset ds = load_dataset(w.data + "/manifest.csv");
    const Sample* orig = nullptr;
    for (const Sample& cand : ds.samples) {
        if (cand.sample_id == "d1_s001") {
            orig = &cand;
        }
    }
    REQUIRE(orig != nullptr);
    const Sample attacked = load_sample(out + "/attacked.bin");
    const auto mask_t = find_tensor(read_container(out + "/mask.bin"), "mask");
    REQUIRE(mask_t.values.size() == 256);
    bool any_masked = false;
    for (std::size_t i = 0; i < 256; ++i) {
        if (mask_t.values[i] == 0.0) {
            CHECK(attacked.image.data[i] == orig->image.data[i]);
        } else {
            any_masked = true;
        }
    }
    CHECK(any_masked);

    // The mapping curve runs from (0,0) to (1,1).
    const std::string curve_text = testutil::slurp_text(out + "/curve.csv");
    CHECK(curve_text.rfind("t,knot\n0,0\n", 0) == 0);
    CHECK(curve_text.find("\n1,1\n") != std::string::npos);
    CHECK(testutil::slurp_text(out + "/loss.txt").rfind("loss_before=", 0) == 0);

    // Zero step: the attacked image equals the original.
    const std::string zero = tmp.str("zero");
    REQUIRE(run_cli("attack-demo --data " + w.data + " --sample d1_s001 --ckpt " + w.run +
                    "/checkpoint.adin --out " + zero + " --delta 0 --seed 5") == 0);
    CHECK(load_sample(zero + "/attacked.bin").image.data == orig->image.data);

    CHECK(run_cli("attack-demo --data " + w.data + " --sample nope --ckpt " + w.run +
                  "/checkpoint.adin --out " + tmp.str("x")) == 1);
}

TEST_CASE("lodo runs the full grid deterministically") {
    CliWorld& w = world();
    TempDir tmp("lodo");
    const std::string out = tmp.str("stdout.txt");
    REQUIRE(run_cli("lodo --data " + w.data + " --out " + tmp.str("l1") +
                        " --seeds 0 --epochs 1 --batch 2",
                    out) == 0);
    const std::string text = testutil::slurp_text(out);
    CHECK(text.find("baseline overall_dice=") != std::string::npos);
    CHECK(text.find("adverin overall_dice=") != std::string::npos);
    REQUIRE(fs::exists(tmp.str("l1/summary.csv")));
    CHECK(fs::exists(tmp.str("l1/baseline/h0/s0/checkpoint.adin")));
    CHECK(fs::exists(tmp.str("l1/adverin/h1/s0/report.csv")));

    REQUIRE(run_cli("lodo --data " + w.data + " --out " + tmp.str("l2") +
                    " --seeds 0 --epochs 1 --batch 2") == 0);
    CHECK(testutil::same_bytes(tmp.str("l1/summary.csv"), tmp.str("l2/summary.csv")));
}

TEST_CASE("gradcheck subcommand reports a pass") {
    TempDir tmp("grad");
    const std::string out = tmp.str("stdout.txt");
    REQUIRE(run_cli("gradcheck --trials 3 --seed 1", out) == 0);
    CHECK(testutil::slurp_text(out).find("gradcheck PASS") != std::string::npos);
}

TEST_CASE("config files feed subcommand options") {
    TempDir tmp("cfg");
    testutil::spit(tmp.str("good.ini"),
                   "[gen-data]\ndomains=2\nper-domain=1\nsize=8\nseed=9\n");
    REQUIRE(run_cli("--config " + tmp.str("good.ini") + " gen-data --out " +
                    tmp.str("d")) == 0);
    const Dataset ds = load_dataset(tmp.str("d/manifest.csv"));
    CHECK(ds.samples.size() == 2);
    CHECK(ds.samples[0].image.height == 8);

    testutil::spit(tmp.str("bad.ini"), "bogus = 1\n");
    CHECK(run_cli("--config " + tmp.str("bad.ini") + " gen-data --out " +
                  tmp.str("e")) == 2);
}
