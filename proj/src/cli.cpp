#include "invctl/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "invctl/analysis.hpp"
#include "invctl/imitation.hpp"
#include "invctl/io_util.hpp"
#include "invctl/nn.hpp"
#include "invctl/scenario.hpp"

namespace invctl {

namespace {

using ordered_json = nlohmann::ordered_json;

void write_json(const std::string& path, const ordered_json& doc) {
    write_text_file(path, doc.dump(2) + "\n");
}

std::string default_sidecar(const std::string& base, const char* suffix) {
    return base + suffix;
}

int input_error(const std::string& what) {
    std::cerr << "error: " << what << "\n";
    return kExitInput;
}

int numeric_error(const std::string& what) {
    std::cerr << "error: " << what << "\n";
    return kExitNumeric;
}

int usage_error(const std::string& what) {
    std::cerr << "usage error: " << what << "\n";
    return kExitUsage;
}

std::string waveform_csv(const WaveformRecord& r, const std::vector<StepTrace>& steps) {
    std::ostringstream body;
    body << "step,t_s,vc_a,vc_b,vc_c,io_a,io_b,io_c,if_a,if_b,if_c,ref_a,ref_b,ref_c,sw\n";
    for (std::size_t k = 0; k < r.v_c_a.size(); ++k) {
        body << steps[k].step << ',' << format_double(steps[k].t) << ','
             << format_double(r.v_c_a[k]) << ',' << format_double(r.v_c_b[k]) << ','
             << format_double(r.v_c_c[k]) << ',' << format_double(r.i_o_a[k]) << ','
             << format_double(r.i_o_b[k]) << ',' << format_double(r.i_o_c[k]) << ','
             << format_double(r.i_f_a[k]) << ',' << format_double(r.i_f_b[k]) << ','
             << format_double(r.i_f_c[k]) << ',' << format_double(r.ref_a[k]) << ','
             << format_double(r.ref_b[k]) << ',' << format_double(r.ref_c[k]) << ','
             << steps[k].chosen << '\n';
    }
    return std::move(body).str();
}

std::string plot_csv(const WaveformRecord& r) {
    std::ostringstream body;
    body << "t_s,vc_a,vc_b,vc_c,io_a,io_b,io_c,if_a,if_b,if_c,ref_a,ref_b,ref_c\n";
    for (std::size_t k = 0; k < r.v_c_a.size(); ++k) {
        body << format_double(static_cast<double>(k) * r.period) << ','
             << format_double(r.v_c_a[k]) << ',' << format_double(r.v_c_b[k]) << ','
             << format_double(r.v_c_c[k]) << ',' << format_double(r.i_o_a[k]) << ','
             << format_double(r.i_o_b[k]) << ',' << format_double(r.i_o_c[k]) << ','
             << format_double(r.i_f_a[k]) << ',' << format_double(r.i_f_b[k]) << ','
             << format_double(r.i_f_c[k]) << ',' << format_double(r.ref_a[k]) << ','
             << format_double(r.ref_b[k]) << ',' << format_double(r.ref_c[k]) << '\n';
    }
    return std::move(body).str();
}

std::optional<double> median(std::vector<double> values) {
    if (values.empty()) return std::nullopt;
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return 0.5 * (values[mid - 1] + values[mid]);
}

ordered_json optional_json(const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

MlpParameters load_model_checked(const std::string& path, bool delayed_features) {
    MlpParameters model = deserialize_model(path);
    const int expected = delayed_features ? 16 : 8;
    check_shape(model, expected, model.hidden_dim(), 7);
    return model;
}

}  // namespace

int cmd_collect(const CollectCli& cfg) {
    std::vector<ScenarioConfig> scenarios;
    try {
        scenarios = load_scenarios(cfg.scenarios_path);
    } catch (const std::exception& e) {
        return input_error(e.what());
    }
    if (scenarios.empty()) {
        std::cerr << "warning: scenario file " << cfg.scenarios_path << " lists no scenarios\n";
    }

    LoopOptions loop;
    loop.substeps = cfg.substeps;
    loop.advance_reference = cfg.advance_reference;

    Dataset dataset;
    ordered_json per_scenario = ordered_json::array();
    for (const ScenarioConfig& sc : scenarios) {
        try {
            const Dataset one = collect({sc}, loop);
            per_scenario.push_back({{"id", sc.id}, {"rows", one.rows.size()}});
            dataset.rows.insert(dataset.rows.end(), one.rows.begin(), one.rows.end());
        } catch (const std::exception& e) {
            if (!cfg.keep_going) return numeric_error(e.what());
            std::cerr << "warning: skipping scenario '" << sc.id << "': " << e.what() << "\n";
            per_scenario.push_back({{"id", sc.id}, {"error", e.what()}});
        }
    }

    try {
        save_dataset(cfg.output_csv, dataset);
        ordered_json manifest;
        manifest["command"] = "collect";
        manifest["scenario_file"] = cfg.scenarios_path;
        manifest["scenario_checksum_fnv1a64"] = file_checksum_hex(cfg.scenarios_path);
        manifest["substeps"] = cfg.substeps;
        manifest["advance_reference"] = cfg.advance_reference;
        manifest["rows"] = dataset.rows.size();
        manifest["scenarios"] = per_scenario;
        manifest["dataset_file"] = cfg.output_csv;
        manifest["dataset_checksum_fnv1a64"] = file_checksum_hex(cfg.output_csv);
        const std::string manifest_path = cfg.manifest_path.empty()
                                              ? default_sidecar(cfg.output_csv, ".manifest.json")
                                              : cfg.manifest_path;
        write_json(manifest_path, manifest);
    } catch (const std::exception& e) {
        return input_error(e.what());
    }
    std::cout << "collected " << dataset.rows.size() << " rows from " << scenarios.size()
              << " scenarios into " << cfg.output_csv << "\n";
    return kExitOk;
}

int cmd_train(const TrainCli& cfg) {
    std::vector<TrainingSample> samples;
    try {
        const Dataset dataset = load_dataset(cfg.dataset_path);
        if (dataset.rows.empty()) return input_error("dataset " + cfg.dataset_path + " is empty");
        samples = to_training_samples(dataset, cfg.delayed_features);
    } catch (const std::exception& e) {
        return input_error(e.what());
    }

    TrainConfig tc;
    tc.hidden_units = cfg.hidden_units;
    tc.max_epochs = cfg.max_epochs;
    tc.patience = cfg.patience;
    tc.rng_seed = cfg.seed;
    tc.activation = cfg.activation == "logistic" ? HiddenActivation::Logistic
                                                 : HiddenActivation::Tanh;
    tc.feature_layout = cfg.delayed_features ? "if_vc_io_vref_ab_delay1" : "if_vc_io_vref_ab";

    MlpParameters model;
    TrainReport report;
    try {
        auto trained = train_scg(samples, tc);
        model = std::move(trained.first);
        report = trained.second;
    } catch (const TrainingDivergence& e) {
        return numeric_error("training diverged at epoch " + std::to_string(e.epoch) + ": " +
                             e.what());
    } catch (const std::exception& e) {
        return input_error(e.what());
    }

    try {
        serialize_model(cfg.model_path, model);
        ordered_json doc;
        doc["command"] = "train";
        doc["dataset_file"] = cfg.dataset_path;
        doc["dataset_checksum_fnv1a64"] = file_checksum_hex(cfg.dataset_path);
        doc["seed"] = cfg.seed;
        doc["hidden_units"] = cfg.hidden_units;
        doc["activation"] = cfg.activation;
        doc["delayed_features"] = cfg.delayed_features;
        doc["max_epochs"] = cfg.max_epochs;
        doc["patience"] = cfg.patience;
        doc["report"] = {{"final_epoch", report.final_epoch},
                         {"best_epoch", report.best_epoch},
                         {"best_validation_loss", report.best_validation_loss},
                         {"train_loss", report.train_loss},
                         {"validation_loss", report.validation_loss},
                         {"test_loss", report.test_loss},
                         {"train_accuracy", report.train_accuracy},
                         {"validation_accuracy", report.validation_accuracy},
                         {"test_accuracy", report.test_accuracy},
                         {"train_rows", report.train_rows},
                         {"validation_rows", report.validation_rows},
                         {"test_rows", report.test_rows}};
        doc["model_file"] = cfg.model_path;
        doc["model_checksum_fnv1a64"] = file_checksum_hex(cfg.model_path);
        const std::string report_path = cfg.report_path.empty()
                                            ? default_sidecar(cfg.model_path, ".report.json")
                                            : cfg.report_path;
        write_json(report_path, doc);
    } catch (const std::exception& e) {
        return input_error(e.what());
    }

    std::printf("trained %zu samples: best validation loss %.5f at epoch %d, test accuracy %.3f\n",
                samples.size(), report.best_validation_loss, report.best_epoch,
                report.test_accuracy);
    return kExitOk;
}

int cmd_simulate(const SimulateCli& cfg) {
    if (cfg.controller != "mpc" && cfg.controller != "ann") {
        return usage_error("unknown controller '" + cfg.controller + "' (expected mpc or ann)");
    }
    if (cfg.controller == "ann" && cfg.model_path.empty()) {
        return usage_error("--controller ann requires --model");
    }

    ScenarioConfig sc;
    MlpParameters model;
    try {
        const std::vector<ScenarioConfig> scenarios = load_scenarios(cfg.scenarios_path);
        if (scenarios.empty()) return input_error(cfg.scenarios_path + " lists no scenarios");
        if (cfg.scenario_id.empty()) {
            sc = scenarios.front();
        } else {
            const auto it = std::find_if(scenarios.begin(), scenarios.end(),
                                         [&](const ScenarioConfig& s) {
                                             return s.id == cfg.scenario_id;
                                         });
            if (it == scenarios.end()) {
                return input_error("scenario '" + cfg.scenario_id + "' not found in " +
                                   cfg.scenarios_path);
            }
            sc = *it;
        }
        if (cfg.controller == "ann") {
            model = load_model_checked(cfg.model_path, cfg.delayed_features);
        }
    } catch (const std::exception& e) {
        return input_error(e.what());
    }

    LoopOptions loop;
    loop.substeps = cfg.substeps;
    loop.advance_reference = cfg.advance_reference;
    AnnOptions ann;
    ann.use_estimated_io = cfg.ann_estimated_io;
    ann.delayed_features = cfg.delayed_features;

    const AnalysisWindow window = default_analysis_window(sc.ts, sc.frequency);
    ScenarioConfig run_sc = sc;
    run_sc.cycles = std::max(sc.cycles, window.skip_cycles + window.window_cycles);

    ClosedLoopResult run;
    try {
        run = cfg.controller == "mpc" ? run_mpc_loop(run_sc, loop)
                                      : run_ann_loop(run_sc, model, loop, ann);
    } catch (const std::exception& e) {
        return input_error(e.what());
    }

    const WaveformRecord record = record_waveform(run, run_sc);
    ordered_json metrics;
    metrics["command"] = "simulate";
    metrics["scenario"] = sc.id;
    metrics["controller"] = cfg.controller;
    metrics["scenario_file"] = cfg.scenarios_path;
    metrics["scenario_checksum_fnv1a64"] = file_checksum_hex(cfg.scenarios_path);
    if (cfg.controller == "ann") {
        metrics["model_file"] = cfg.model_path;
        metrics["model_checksum_fnv1a64"] = file_checksum_hex(cfg.model_path);
    }
    metrics["steps"] = run.steps.size();
    metrics["diverged"] = run.diverged;

    const std::string metrics_path = cfg.metrics_path.empty()
                                         ? default_sidecar(cfg.output_csv, ".metrics.json")
                                         : cfg.metrics_path;
    try {
        write_text_file(cfg.output_csv, waveform_csv(record, run.steps));
    } catch (const std::exception& e) {
        return input_error(e.what());
    }

    if (run.diverged) {
        metrics["last_good_step"] = run.last_good_step;
        try {
            write_json(metrics_path, metrics);
        } catch (const std::exception& e) {
            return input_error(e.what());
        }
        return numeric_error("simulation diverged; last good step " +
                             std::to_string(run.last_good_step));
    }

    try {
        const std::vector<double> slice = window_slice(record.v_c_a, sc.ts, sc.frequency,
                                                       window.skip_cycles, window.window_cycles);
        const ThdReport rep = thd(slice, sc.ts, sc.frequency, cfg.max_harmonic);
        const std::optional<double> settle = settling_time(record, cfg.settle_band, sc.frequency);
        const double rms = rms_tracking_error(record, sc.frequency, window.skip_cycles,
                                              window.window_cycles);
        std::optional<double> settle_ms;
        if (settle) settle_ms = 1e3 * *settle;
        metrics["thd_percent"] = 100.0 * rep.thd;
        metrics["fundamental_amplitude_v"] = rep.fundamental_amplitude;
        metrics["rms_tracking_error_percent"] = 100.0 * rms;
        metrics["settling_ms"] = optional_json(settle_ms);
        metrics["analysis_window_cycles"] = {{"skip", window.skip_cycles},
                                             {"window", window.window_cycles}};
        write_json(metrics_path, metrics);
        const std::string settle_text =
            settle_ms ? format_double(*settle_ms) + " ms" : std::string("never");
        std::printf("%s on %s: THD %.3f%%, settling %s, rms error %.3f%%\n",
                    cfg.controller.c_str(), sc.id.c_str(), 100.0 * rep.thd, settle_text.c_str(),
                    100.0 * rms);
    } catch (const std::domain_error& e) {
        write_json(metrics_path, metrics);
        return numeric_error(e.what());
    } catch (const std::exception& e) {
        return input_error(e.what());
    }
    return kExitOk;
}

int cmd_compare(const CompareCli& cfg) {
    std::vector<ScenarioConfig> scenarios;
    MlpParameters model;
    try {
        scenarios = load_scenarios(cfg.scenarios_path);
        model = load_model_checked(cfg.model_path, cfg.delayed_features);
    } catch (const std::exception& e) {
        return input_error(e.what());
    }

    ComparisonOptions opt;
    opt.loop.substeps = cfg.substeps;
    opt.loop.advance_reference = cfg.advance_reference;
    opt.ann.use_estimated_io = cfg.ann_estimated_io;
    opt.ann.delayed_features = cfg.delayed_features;
    opt.max_harmonic = cfg.max_harmonic;
    opt.settle_band = cfg.settle_band;
    opt.keep_waveforms = !cfg.waveform_dir.empty();

    ComparisonOutput output;
    try {
        output = compare_controllers(scenarios, model, opt);
    } catch (const std::exception& e) {
        return numeric_error(e.what());
    }

    std::vector<double> ann_values;
    std::vector<double> mpc_values;
    std::size_t wins = 0;
    std::size_t decided = 0;
    std::size_t failures = 0;
    for (const ComparisonRow& r : output.rows) {
        if (r.thd_ann) ann_values.push_back(*r.thd_ann);
        if (r.thd_mpc) mpc_values.push_back(*r.thd_mpc);
        if (r.thd_ann && r.thd_mpc) {
            ++decided;
            if (*r.thd_ann <= *r.thd_mpc) ++wins;
        }
        if (r.status != "ok") ++failures;
    }

    try {
        write_text_file(cfg.output_csv, comparison_csv(output.rows));
        if (opt.keep_waveforms) {
            std::filesystem::create_directories(cfg.waveform_dir);
            for (std::size_t i = 0; i < output.rows.size(); ++i) {
                const std::string base = cfg.waveform_dir + "/" + output.rows[i].sample;
                write_text_file(base + "_mpc.csv", plot_csv(output.mpc_waveforms[i]));
                write_text_file(base + "_ann.csv", plot_csv(output.ann_waveforms[i]));
            }
        }
        ordered_json manifest;
        manifest["command"] = "compare";
        manifest["scenario_file"] = cfg.scenarios_path;
        manifest["scenario_checksum_fnv1a64"] = file_checksum_hex(cfg.scenarios_path);
        manifest["model_file"] = cfg.model_path;
        manifest["model_checksum_fnv1a64"] = file_checksum_hex(cfg.model_path);
        manifest["rows"] = output.rows.size();
        manifest["failed_rows"] = failures;
        manifest["median_thd_ann_percent"] = optional_json(median(ann_values));
        manifest["median_thd_mpc_percent"] = optional_json(median(mpc_values));
        manifest["ann_win_rate"] =
            decided > 0 ? ordered_json(static_cast<double>(wins) / static_cast<double>(decided))
                        : ordered_json(nullptr);
        manifest["table_file"] = cfg.output_csv;
        manifest["table_checksum_fnv1a64"] = file_checksum_hex(cfg.output_csv);
        const std::string manifest_path = cfg.manifest_path.empty()
                                              ? default_sidecar(cfg.output_csv, ".manifest.json")
                                              : cfg.manifest_path;
        write_json(manifest_path, manifest);
    } catch (const std::exception& e) {
        return input_error(e.what());
    }

    const auto med_text = [](const std::optional<double>& v) {
        return v ? format_double(*v) + "%" : std::string("n/a");
    };
    std::cout << "compared " << output.rows.size() << " scenarios: median THD ann "
              << med_text(median(ann_values)) << ", mpc " << med_text(median(mpc_values))
              << ", ann wins " << wins << "/" << decided << "\n";
    if (!output.rows.empty() && decided == 0) {
        return numeric_error("no scenario produced a comparable THD pair");
    }
    return kExitOk;
}

int cmd_thd(const ThdCli& cfg) {
    std::vector<double> series;
    double period = 0.0;
    try {
        const std::string body = read_text_file(cfg.input_csv);
        std::istringstream in(body);
        std::string line;
        if (!std::getline(in, line)) return input_error(cfg.input_csv + " is empty");
        const std::vector<std::string> header = split_csv_line(line);
        const auto t_it = std::find(header.begin(), header.end(), "t_s");
        const auto col_it = std::find(header.begin(), header.end(), cfg.column);
        if (t_it == header.end()) return input_error(cfg.input_csv + " has no t_s column");
        if (col_it == header.end()) {
            return input_error(cfg.input_csv + " has no column '" + cfg.column + "'");
        }
        const std::size_t t_index = static_cast<std::size_t>(t_it - header.begin());
        const std::size_t col_index = static_cast<std::size_t>(col_it - header.begin());
        std::vector<double> times;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const std::vector<std::string> fields = split_csv_line(line);
            if (fields.size() != header.size()) {
                return input_error(cfg.input_csv + ": ragged row");
            }
            times.push_back(parse_double(fields[t_index]));
            series.push_back(parse_double(fields[col_index]));
        }
        if (series.size() < 2) return input_error(cfg.input_csv + " has too few samples");
        period = times[1] - times[0];
        if (!(period > 0.0)) return input_error(cfg.input_csv + ": non-increasing t_s");
    } catch (const std::exception& e) {
        return input_error(e.what());
    }

    try {
        const double spc = 1.0 / (cfg.fundamental * period);
        int cycles = cfg.cycles;
        if (cycles == 0) {
            // Largest whole-sample window that fits after the skip.
            const int q = cycles_per_integer_window(period, cfg.fundamental);
            const int whole = static_cast<int>(std::floor(
                static_cast<double>(series.size()) / spc + 1e-9)) - cfg.skip_cycles;
            cycles = whole - whole % q;
        }
        if (cycles < 2) return input_error("record holds fewer than two whole analyzable cycles");
        const std::vector<double> slice =
            window_slice(series, period, cfg.fundamental, cfg.skip_cycles, cycles);
        const ThdReport rep = thd(slice, period, cfg.fundamental, cfg.max_harmonic);
        std::printf("column %s: fundamental %.6g at %.6g Hz, THD %.4f%%\n", cfg.column.c_str(),
                    rep.fundamental_amplitude, rep.fundamental_hz, 100.0 * rep.thd);
        const int shown = std::min<int>(13, cfg.max_harmonic);
        for (int h = 2; h <= shown; ++h) {
            const double a = rep.harmonic_amplitude[static_cast<std::size_t>(h - 1)];
            std::printf("  h%02d %.6g (%.4f%%)\n", h, a,
                        100.0 * a / rep.fundamental_amplitude);
        }
    } catch (const std::domain_error& e) {
        return numeric_error(e.what());
    } catch (const std::exception& e) {
        return input_error(e.what());
    }
    return kExitOk;
}

}  // namespace invctl
