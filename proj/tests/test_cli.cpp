#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "invctl/imitation.hpp"
#include "invctl/io_util.hpp"
#include "invctl/scenario.hpp"

using namespace invctl;

namespace {

// Everything lands in a scratch directory under the test's working dir.
const std::filesystem::path kScratch = "cli_scratch";

int run_cli(const std::string& args) {
    std::filesystem::create_directories(kScratch);
    const std::string cmd = std::string(INVCTL_CLI_PATH) + " " + args + " > " +
                            (kScratch / "stdout.txt").string() + " 2> " +
                            (kScratch / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string scratch(const std::string& name) { return (kScratch / name).string(); }

std::string captured_stderr() { return read_text_file(scratch("stderr.txt")); }

void write_tiny_scenarios(const std::string& path) {
    write_text_file(path, R"({
  "scenarios": [
    {"id": "tiny_r10", "load": {"kind": "resistive", "r_ohm": 10},
     "ts_us": 30, "l_mh": 2, "c_uf": 40, "vdc_v": 500, "vref_v": 200, "freq_hz": 50,
     "cycles": 2},
    {"id": "tiny_r25", "load": {"kind": "resistive", "r_ohm": 25},
     "ts_us": 30, "l_mh": 2, "c_uf": 40, "vdc_v": 500, "vref_v": 200, "freq_hz": 50,
     "cycles": 2}
  ]
})");
}

}  // namespace

TEST_CASE("bad invocations exit with the usage code") {
    CHECK(run_cli("") == 1);
    CHECK(run_cli("frobnicate") == 1);
    CHECK(run_cli("simulate --scenarios x.json --controller juggler --output o.csv") == 1);
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("collect --help") == 0);
}

TEST_CASE("missing inputs exit with the input code") {
    CHECK(run_cli("collect --scenarios does_not_exist.json --output " + scratch("d.csv")) == 2);
    CHECK(run_cli("train --dataset does_not_exist.csv --model " + scratch("m.bin")) == 2);
    CHECK(run_cli("compare --scenarios does_not_exist.json --model nope.bin --output " +
                  scratch("c.csv")) == 2);
    CHECK(run_cli("thd --input does_not_exist.csv") == 2);
}

TEST_CASE("malformed scenario files exit with the input code") {
    write_text_file(scratch("broken.json"), "{\"scenarios\": [{\"id\": \"x\"");
    CHECK(run_cli("collect --scenarios " + scratch("broken.json") + " --output " +
                  scratch("d.csv")) == 2);

    write_text_file(scratch("badval.json"),
                    R"({"scenarios": [{"id": "x", "load": {"kind": "resistive", "r_ohm": -5},
                        "ts_us": 30, "l_mh": 2, "c_uf": 40, "vdc_v": 500, "vref_v": 200,
                        "freq_hz": 50}]})");
    CHECK(run_cli("collect --scenarios " + scratch("badval.json") + " --output " +
                  scratch("d.csv")) == 2);
    CHECK(captured_stderr().find("x") != std::string::npos);
}

TEST_CASE("thd of an all-zero waveform exits with the numeric code") {
    std::string csv = "t_s,vc_a\n";
    for (int k = 0; k < 1600; ++k) {
        csv += format_double(k * 25e-6) + ",0\n";
    }
    write_text_file(scratch("zeros.csv"), csv);
    CHECK(run_cli("thd --input " + scratch("zeros.csv") + " --column vc_a") == 3);
    CHECK(captured_stderr().find("fundamental amplitude") != std::string::npos);
}

TEST_CASE("collect, train, simulate, and compare chain end to end") {
    std::filesystem::create_directories(kScratch);
    const std::string scen = scratch("tiny.json");
    write_tiny_scenarios(scen);

    const std::string dataset = scratch("tiny_dataset.csv");
    REQUIRE(run_cli("collect --scenarios " + scen + " --output " + dataset) == 0);
    REQUIRE(std::filesystem::exists(dataset));
    REQUIRE(std::filesystem::exists(dataset + ".manifest.json"));

    const auto rows = load_dataset(dataset);
    CHECK(rows.rows.size() == 2 * 1333);

    const auto manifest = nlohmann::json::parse(read_text_file(dataset + ".manifest.json"));
    CHECK(manifest["command"] == "collect");
    CHECK(manifest["rows"].get<std::size_t>() == rows.rows.size());
    CHECK(manifest["dataset_checksum_fnv1a64"].get<std::string>() ==
          file_checksum_hex(dataset));

    const std::string model = scratch("tiny_model.bin");
    REQUIRE(run_cli("train --dataset " + dataset + " --model " + model +
                    " --hidden 10 --max-epochs 150 --seed 3") == 0);
    REQUIRE(std::filesystem::exists(model));
    REQUIRE(std::filesystem::exists(model + ".report.json"));
    const auto report = nlohmann::json::parse(read_text_file(model + ".report.json"));
    CHECK(report["report"]["train_rows"].get<int>() > 0);
    CHECK(report["model_checksum_fnv1a64"].get<std::string>() == file_checksum_hex(model));

    const std::string wave = scratch("tiny_mpc.csv");
    REQUIRE(run_cli("simulate --scenarios " + scen + " --id tiny_r10 --controller mpc --output " +
                    wave) == 0);
    REQUIRE(std::filesystem::exists(wave));
    const auto metrics = nlohmann::json::parse(read_text_file(wave + ".metrics.json"));
    CHECK(metrics["controller"] == "mpc");
    CHECK(metrics["diverged"] == false);
    CHECK(metrics["thd_percent"].get<double>() > 0.0);
    CHECK(metrics["thd_percent"].get<double>() < 20.0);
    {
        std::ifstream in(wave);
        std::string header;
        std::getline(in, header);
        CHECK(header ==
              "step,t_s,vc_a,vc_b,vc_c,io_a,io_b,io_c,if_a,if_b,if_c,ref_a,ref_b,ref_c,sw");
    }

    // The recorded waveform feeds back into the thd subcommand.
    CHECK(run_cli("thd --input " + wave + " --column vc_a --skip-cycles 2") == 0);

    const std::string wave_ann = scratch("tiny_ann.csv");
    REQUIRE(run_cli("simulate --scenarios " + scen + " --id tiny_r10 --controller ann --model " +
                    model + " --output " + wave_ann) == 0);

    const std::string table = scratch("tiny_table.csv");
    REQUIRE(run_cli("compare --scenarios " + scen + " --model " + model + " --output " + table +
                    " --waveform-dir " + scratch("waves")) == 0);
    REQUIRE(std::filesystem::exists(table));
    const auto cmp = nlohmann::json::parse(read_text_file(table + ".manifest.json"));
    CHECK(cmp["rows"].get<int>() == 2);
    CHECK(std::filesystem::exists(scratch("waves") + "/tiny_r10_mpc.csv"));
    CHECK(std::filesystem::exists(scratch("waves") + "/tiny_r10_ann.csv"));
    {
        std::ifstream in(table);
        std::string header;
        std::getline(in, header);
        CHECK(header == "sample,load_kind,load_params,ts_us,l_mh,c_uf,vdc,vref,thd_ann,thd_mpc,"
                        "tss_mpc_ms,tss_ann_ms,status");
    }
}

TEST_CASE("simulate rejects an ann run without a model") {
    const std::string scen = scratch("tiny2.json");
    write_tiny_scenarios(scen);
    CHECK(run_cli("simulate --scenarios " + scen + " --controller ann --output " +
                  scratch("w.csv")) == 1);
}

TEST_CASE("simulate names unknown scenario ids") {
    const std::string scen = scratch("tiny3.json");
    write_tiny_scenarios(scen);
    CHECK(run_cli("simulate --scenarios " + scen + " --id missing --controller mpc --output " +
                  scratch("w.csv")) == 2);
    CHECK(captured_stderr().find("missing") != std::string::npos);
}

TEST_CASE("shipped scenario tables parse and validate") {
    const std::filesystem::path dir = INVCTL_SCENARIO_DIR;
    for (const char* name : {"table2_nominal.json", "table3_case1.json", "table3_case2.json",
                             "train_default.json", "test_resistive.json"}) {
        CAPTURE(name);
        const auto scenarios = load_scenarios((dir / name).string());
        CHECK(!scenarios.empty());
        for (const auto& sc : scenarios) {
            CAPTURE(sc.id);
            CHECK_NOTHROW(sc.validate());
        }
    }
}
