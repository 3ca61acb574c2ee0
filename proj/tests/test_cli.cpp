// End-to-end tests of the voxsyn command-line tool. The binary under test is
// named by the VOXSYN_TOOL environment variable (set by the CTest harness);
// every case works inside its own scratch directory.

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string tool_path() {
    const char* t = std::getenv("VOXSYN_TOOL");
    REQUIRE(t != nullptr);
    return t;
}

struct Scratch {
    fs::path dir;

    Scratch() {
        static int counter = 0;
        dir = fs::temp_directory_path() /
              ("voxsyn_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(dir);
    }
    ~Scratch() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    Scratch(const Scratch&) = delete;
    Scratch& operator=(const Scratch&) = delete;

    std::string path(const std::string& name) const { return (dir / name).string(); }

    // Runs the tool with `args` using the scratch dir as working directory.
    // Returns the exit code; stdout/stderr land in run_out.log / run_err.log.
    int run(const std::string& args) const {
        const std::string cmd = "cd \"" + dir.string() + "\" && \"" + tool_path() + "\" " +
                                args + " > run_out.log 2> run_err.log";
        const int status = std::system(cmd.c_str());
        if (status == -1) return -1;
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string read(const std::string& name) const {
        std::ifstream in(dir / name, std::ios::binary);
        REQUIRE(in.good());
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    std::string stderr_text() const { return read("run_err.log"); }

    json read_json(const std::string& name) const { return json::parse(read(name)); }

    void write(const std::string& name, const std::string& content) const {
        std::ofstream out(dir / name, std::ios::binary);
        REQUIRE(out.good());
        out << content;
    }

    bool exists(const std::string& name) const { return fs::exists(dir / name); }
};

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

} // namespace

TEST_CASE("cli: requires a subcommand and offers help") {
    Scratch s;
    CHECK(s.run("") == 2);
    CHECK(s.run("--help") == 0);
    CHECK(s.run("frobnicate") == 2);
    CHECK(s.run("synth") == 2); // missing required --out
}

TEST_CASE("cli: synth, detect, evaluate round-trip recovers the planted scene") {
    Scratch s;
    REQUIRE(s.run("synth --shape 96,96,96 --n-synapses 10 --seed 5 --out s") == 0);
    for (const char* f :
         {"s_pre_prob.json", "s_pre_prob.raw", "s_post_prob.json", "s_post_prob.raw",
          "s_pre.csv", "s_post.csv", "s_pairs.json", "s_manifest.json"})
        REQUIRE(s.exists(f));

    REQUIRE(s.run("detect s_pre_prob.json s_post_prob.json --out d") == 0);
    for (const char* f : {"d_pre.csv", "d_post.csv", "d_pairs.json", "d_manifest.json"})
        REQUIRE(s.exists(f));

    const json man = s.read_json("d_manifest.json");
    CHECK(man["tool"] == "voxsyn");
    CHECK(man["subcommand"] == "detect");
    CHECK(man["config"]["threshold"]["mode"] == "relative");
    CHECK(man["channels"]["pre"]["tau"].get<double>() > 0.0);
    // volume inputs are digested as header + payload
    CHECK(man["inputs"].contains("pre_prob"));
    CHECK(man["inputs"].contains("pre_prob_raw"));
    CHECK(man["inputs"]["pre_prob_raw"]["fnv1a64"].get<std::string>().size() == 16);

    REQUIRE(s.run("evaluate d_pre.csv d_post.csv s_pre.csv s_post.csv "
                  "--detected-pairs d_pairs.json --truth-pairs s_pairs.json --out e") == 0);
    const json report = s.read_json("e_report.json");
    CHECK(report["pre"]["f1"] == 1.0);
    CHECK(report["post"]["f1"] == 1.0);
    CHECK(report["pairs"]["f1"] == 1.0);
    CHECK(report["pre"]["degenerate"] == false);
    CHECK(report["degree_histogram"]["detected"]["distinct_pre"] ==
          report["degree_histogram"]["truth"]["distinct_pre"]);

    const std::string csv = s.read("e_report.csv");
    CHECK(csv.rfind("volume,channel,tp,fp,fn", 0) == 0);
    CHECK(count_lines(csv) == 4); // header + pre + post + pairs
}

TEST_CASE("cli: invalid flag values and malformed configs exit with code 2") {
    Scratch s;
    REQUIRE(s.run("synth --shape 80,80,80 --n-synapses 4 --seed 1 --out s") == 0);

    SECTION("manual tau out of range") {
        CHECK(s.run("detect s_pre_prob.json s_post_prob.json --threshold-mode manual "
                    "--tau 1.1 --out d") == 2);
        CHECK(s.stderr_text().find("threshold.tau") != std::string::npos);
    }
    SECTION("unknown config key is named by path") {
        s.write("cfg.json", R"({"threshold": {"mode": "manual", "tau": 0.5, "typo": 1}})");
        CHECK(s.run("detect s_pre_prob.json s_post_prob.json --config cfg.json --out d") == 2);
        CHECK(s.stderr_text().find("threshold.typo") != std::string::npos);
    }
    SECTION("config that is not JSON") {
        s.write("cfg.json", "not json at all");
        CHECK(s.run("detect s_pre_prob.json s_post_prob.json --config cfg.json --out d") == 2);
    }
    SECTION("missing input file") {
        CHECK(s.run("detect nosuch.json s_post_prob.json --out d") == 2);
    }
    SECTION("evaluate rejects mixing voxel and nm thresholds") {
        CHECK(s.run("evaluate s_pre.csv s_post.csv s_pre.csv s_post.csv "
                    "--threshold 50 --threshold-nm 400 --out e") == 2);
    }
    SECTION("evaluate requires both pair files or neither") {
        CHECK(s.run("evaluate s_pre.csv s_post.csv s_pre.csv s_post.csv "
                    "--detected-pairs s_pairs.json --out e") == 2);
    }
}

TEST_CASE("cli: rendered targets decode back to the planted points") {
    Scratch s;
    s.write("tpre.csv", "id,z,y,x\n0,20,20,20\n1,20,20,60\n2,60,40,30\n");
    s.write("tpost.csv", "id,z,y,x\n0,20,20,29\n1,28,20,60\n2,60,48,30\n");
    REQUIRE(s.run("make-targets tpre.csv tpost.csv --shape 80,80,80 --radius 4 --out mt") ==
            0);
    for (const char* f : {"mt_pre_target.json", "mt_pre_target.raw", "mt_pre_weight.json",
                          "mt_post_target.json", "mt_post_weight.json", "mt_manifest.json"})
        REQUIRE(s.exists(f));

    // weight metadata follows the foreground/background balance rule
    const json man = s.read_json("mt_manifest.json");
    const double fg = man["weights"]["pre"]["fg"].get<double>();
    const double bg = man["weights"]["pre"]["bg"].get<double>();
    CHECK(fg > bg);

    REQUIRE(s.run("detect mt_pre_target.json mt_post_target.json --peak-method blob_log "
                  "--threshold-mode manual --tau 0.5 --d-min 8 --out bd") == 0);
    REQUIRE(s.run("evaluate bd_pre.csv bd_post.csv tpre.csv tpost.csv --out be") == 0);
    const json report = s.read_json("be_report.json");
    CHECK(report["pre"]["f1"] == 1.0);
    CHECK(report["post"]["f1"] == 1.0);
    for (const auto& m : report["pre"]["matches"])
        CHECK(m["distance_voxels"].get<double>() == 0.0);
}

TEST_CASE("cli: detect outputs are identical across thread counts and accept --threads after the subcommand") {
    Scratch s;
    REQUIRE(s.run("synth --shape 96,96,96 --n-synapses 8 --seed 11 --out s") == 0);
    REQUIRE(s.run("detect s_pre_prob.json s_post_prob.json --out one --threads 1") == 0);
    REQUIRE(s.run("detect s_pre_prob.json s_post_prob.json --threads 8 --out eight") == 0);
    CHECK(s.read("one_pre.csv") == s.read("eight_pre.csv"));
    CHECK(s.read("one_post.csv") == s.read("eight_post.csv"));
    CHECK(s.read("one_pairs.json") == s.read("eight_pairs.json"));
}

TEST_CASE("cli: the synth manifest config reruns to identical volumes") {
    Scratch s;
    REQUIRE(s.run("synth --shape 80,80,80 --n-synapses 6 --seed 21 --out a") == 0);
    const json man = s.read_json("a_manifest.json");
    s.write("replay.json", man["config"].dump(2));
    REQUIRE(s.run("synth --config replay.json --out b") == 0);
    CHECK(s.read("a_pre_prob.raw") == s.read("b_pre_prob.raw"));
    CHECK(s.read("a_post_prob.raw") == s.read("b_post_prob.raw"));
    CHECK(s.read("a_pre.csv") == s.read("b_pre.csv"));
    CHECK(s.read("a_pairs.json") == s.read("b_pairs.json"));
}

TEST_CASE("cli: relative_batch thresholding pools the listed volumes") {
    Scratch s;
    REQUIRE(s.run("synth --shape 80,80,80 --n-synapses 5 --seed 2 --out v1") == 0);
    REQUIRE(s.run("synth --shape 80,80,80 --n-synapses 5 --seed 3 --out v2") == 0);
    REQUIRE(s.run("detect v1_pre_prob.json v1_post_prob.json --threshold-mode relative_batch "
                  "--batch-pre v2_pre_prob.json --batch-post v2_post_prob.json --out d") == 0);
    const json man = s.read_json("d_manifest.json");
    CHECK(man["config"]["threshold"]["mode"] == "relative_batch");
    CHECK(man["inputs"].contains("batch_pre_0"));
    CHECK(man["inputs"].contains("batch_post_0"));
    CHECK(man["channels"]["pre"]["tau"].get<double>() > 0.0);
}

TEST_CASE("cli: sweep writes one summary row and one cell per value") {
    Scratch s;
    REQUIRE(s.run("synth --shape 80,80,80 --n-synapses 5 --seed 9 --out s") == 0);
    REQUIRE(s.run("sweep s_pre_prob.json s_post_prob.json --param filter.d_min_voxels "
                  "--values 2,8,40 --truth-pre s_pre.csv --truth-post s_post.csv "
                  "--truth-pairs s_pairs.json --out sw") == 0);
    const std::string summary = s.read("sw_summary.csv");
    CHECK(count_lines(summary) == 4); // header + 3 cells
    CHECK(summary.rfind("param,value,", 0) == 0);
    CHECK(summary.find("tp_pairs") != std::string::npos);
    for (int k = 0; k < 3; ++k) {
        REQUIRE(s.exists("sw_cell" + std::to_string(k) + "_pre.csv"));
        REQUIRE(s.exists("sw_cell" + std::to_string(k) + "_manifest.json"));
    }
    const json man = s.read_json("sw_manifest.json");
    CHECK(man["cells"].size() == 3);
    CHECK(man["config"]["param"] == "filter.d_min_voxels");

    SECTION("an unknown sweep parameter path fails") {
        CHECK(s.run("sweep s_pre_prob.json s_post_prob.json --param filter.bogus "
                    "--values 1 --out bad") == 2);
    }
}

TEST_CASE("cli: similarity produces a labelled symmetric matrix") {
    Scratch s;
    REQUIRE(s.run("synth --shape 96,96,96 --n-synapses 8 --seed 4 --out g1") == 0);
    REQUIRE(s.run("synth --shape 96,96,96 --n-synapses 8 --seed 6 --out g2") == 0);
    REQUIRE(s.run("similarity --group g1_pre_prob.json:g1_pre.csv:alpha "
                  "--group g2_pre_prob.json:g2_pre.csv --metric cosine --size 16 --out sim") ==
            0);
    const std::string csv = s.read("sim_matrix.csv");
    CHECK(csv.rfind(",alpha,g2_pre_prob", 0) == 0); // label defaults to the volume stem

    // parse the 2x2 body and check symmetry + diagonal dominance
    std::istringstream lines(csv);
    std::string header, row1, row2;
    std::getline(lines, header);
    std::getline(lines, row1);
    std::getline(lines, row2);
    auto cell = [](const std::string& row, int idx) {
        std::istringstream ss(row);
        std::string item;
        for (int i = 0; i <= idx; ++i) std::getline(ss, item, ',');
        return std::stod(item);
    };
    const double m01 = cell(row1, 2), m10 = cell(row2, 1);
    CHECK(m01 == m10); // the library mirrors each cell, so the strings match exactly
    CHECK(m01 >= -1.0);
    CHECK(m01 <= 1.0);

    const json meta = s.read_json("sim_meta.json");
    CHECK(meta["metric"] == "cosine");
    CHECK(meta["groups"].size() == 2);
    CHECK(meta["pair_counts"][0][1].get<std::int64_t>() > 0);
}
