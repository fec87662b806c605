#pragma once

#include <cstdint>
#include <string>

namespace invctl {

// Exit-code contract shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumeric = 3;

struct CollectCli {
    std::string scenarios_path;
    std::string output_csv;
    std::string manifest_path;  ///< default: output_csv + ".manifest.json"
    int substeps = 32;
    bool keep_going = false;
    bool advance_reference = false;
};

struct TrainCli {
    std::string dataset_path;
    std::string model_path;
    std::string report_path;  ///< default: model_path + ".report.json"
    int hidden_units = 15;
    int max_epochs = 2000;
    int patience = 50;
    std::uint64_t seed = 1;
    bool delayed_features = false;
    std::string activation = "tanh";
};

struct SimulateCli {
    std::string scenarios_path;
    std::string scenario_id;  ///< empty selects the file's first scenario
    std::string controller;   ///< "mpc" or "ann"
    std::string model_path;
    std::string output_csv;
    std::string metrics_path;  ///< default: output_csv + ".metrics.json"
    int substeps = 32;
    bool advance_reference = false;
    bool ann_estimated_io = false;
    bool delayed_features = false;
    int max_harmonic = 50;
    double settle_band = 0.05;
};

struct CompareCli {
    std::string scenarios_path;
    std::string model_path;
    std::string output_csv;
    std::string manifest_path;  ///< default: output_csv + ".manifest.json"
    std::string waveform_dir;   ///< when set, per-scenario waveform dumps land here
    int substeps = 32;
    bool advance_reference = false;
    bool ann_estimated_io = false;
    bool delayed_features = false;
    int max_harmonic = 50;
    double settle_band = 0.05;
};

struct ThdCli {
    std::string input_csv;
    std::string column = "vc_a";
    double fundamental = 50.0;
    int max_harmonic = 50;
    int skip_cycles = 0;
    int cycles = 0;  ///< 0 analyzes every whole cycle after the skip
};

int cmd_collect(const CollectCli& cfg);
int cmd_train(const TrainCli& cfg);
int cmd_simulate(const SimulateCli& cfg);
int cmd_compare(const CompareCli& cfg);
int cmd_thd(const ThdCli& cfg);

}  // namespace invctl
