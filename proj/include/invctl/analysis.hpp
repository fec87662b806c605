#pragma once

#include <optional>
#include <string>
#include <vector>

#include "invctl/imitation.hpp"

namespace invctl {

/// Per-phase time series sampled once per control period.
struct WaveformRecord {
    double period = 0.0;  ///< seconds between samples
    std::vector<double> v_c_a, v_c_b, v_c_c;
    std::vector<double> i_o_a, i_o_b, i_o_c;
    std::vector<double> i_f_a, i_f_b, i_f_c;
    std::vector<double> ref_a, ref_b, ref_c;
};

struct ThdReport {
    double fundamental_hz = 0.0;
    double fundamental_amplitude = 0.0;
    double thd = 0.0;  ///< fraction: RMS of harmonics 2..N over the fundamental
    std::vector<double> harmonic_amplitude;  ///< order h stored at [h-1]
};

/// Per-phase view of a closed-loop run.
WaveformRecord record_waveform(const ClosedLoopResult& run, const ScenarioConfig& sc);

/// Harmonic analysis over an integer-cycle rectangular window. Throws
/// std::invalid_argument when the window is not a whole number (>= 2) of
/// fundamental cycles or the sample rate cannot resolve max_harmonic, and
/// std::domain_error when the fundamental amplitude is too small to divide
/// by.
ThdReport thd(const std::vector<double>& signal, double period, double fundamental,
              int max_harmonic);

/// First time after which the stationary-frame tracking error magnitude
/// stays within tolerance_band times the reference amplitude for one full
/// fundamental cycle. Empty when the run never settles.
std::optional<double> settling_time(const WaveformRecord& record, double tolerance_band,
                                    double fundamental);

/// RMS of the stationary-frame tracking error over the given whole-cycle
/// window, relative to the reference amplitude.
double rms_tracking_error(const WaveformRecord& record, double fundamental, int skip_cycles,
                          int cycles);

/// Smallest cycle count whose duration is a whole number of samples.
int cycles_per_integer_window(double period, double fundamental);

/// Standard analysis window: skip the first two cycles, then cover at least
/// four, rounded up to a whole-sample cycle count.
struct AnalysisWindow {
    int skip_cycles = 2;
    int window_cycles = 4;
};
AnalysisWindow default_analysis_window(double period, double fundamental);

/// Copy of the samples spanning [skip_cycles, skip_cycles + cycles).
std::vector<double> window_slice(const std::vector<double>& signal, double period,
                                 double fundamental, int skip_cycles, int cycles);

/// One comparison-table row. Metric fields are empty when that controller
/// failed; status is "ok" or a '|'-joined list of failure tokens.
struct ComparisonRow {
    std::string sample;
    std::string load_kind;
    std::string load_params;
    double ts_us = 0.0;
    double l_mh = 0.0;
    double c_uf = 0.0;
    double vdc = 0.0;
    double vref = 0.0;
    std::optional<double> thd_ann;     ///< percent
    std::optional<double> thd_mpc;     ///< percent
    std::optional<double> tss_mpc_ms;  ///< settling time, 5 percent band
    std::optional<double> tss_ann_ms;
    std::string status = "ok";
};

struct ComparisonOptions {
    LoopOptions loop;
    AnnOptions ann;
    int max_harmonic = 50;
    double settle_band = 0.05;
    bool keep_waveforms = false;  ///< retain per-run waveforms for plot dumps
};

struct ComparisonOutput {
    std::vector<ComparisonRow> rows;
    std::vector<WaveformRecord> mpc_waveforms;  ///< parallel to rows when kept
    std::vector<WaveformRecord> ann_waveforms;
};

/// Runs both controllers from zero state on every scenario and reduces each
/// run to THD over the standard analysis window and settling time.
/// Per-scenario failures land in the row's status; the sweep continues.
ComparisonOutput compare_controllers(const std::vector<ScenarioConfig>& scenarios,
                                     const MlpParameters& model, const ComparisonOptions& opt);

/// The comparison table as CSV text (header + one line per row).
std::string comparison_csv(const std::vector<ComparisonRow>& rows);

}  // namespace invctl
