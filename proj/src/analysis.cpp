#include "invctl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "invctl/io_util.hpp"

namespace invctl {

namespace {

constexpr double kFundamentalFloor = 1e-9;

double samples_per_cycle(double period, double fundamental) {
    if (!(period > 0.0)) throw std::invalid_argument("sample period must be positive");
    if (!(fundamental > 0.0)) throw std::invalid_argument("fundamental must be positive");
    return 1.0 / (fundamental * period);
}

std::size_t record_length(const WaveformRecord& r) {
    const std::size_t n = r.v_c_a.size();
    const bool consistent = r.v_c_b.size() == n && r.v_c_c.size() == n && r.i_o_a.size() == n &&
                            r.i_o_b.size() == n && r.i_o_c.size() == n && r.i_f_a.size() == n &&
                            r.i_f_b.size() == n && r.i_f_c.size() == n && r.ref_a.size() == n &&
                            r.ref_b.size() == n && r.ref_c.size() == n;
    if (!consistent) throw std::invalid_argument("waveform series lengths differ");
    if (!(r.period > 0.0)) throw std::invalid_argument("waveform period must be positive");
    return n;
}

AlphaBetaVector tracking_error_at(const WaveformRecord& r, std::size_t k) {
    return clarke({r.v_c_a[k] - r.ref_a[k], r.v_c_b[k] - r.ref_b[k], r.v_c_c[k] - r.ref_c[k]});
}

double reference_amplitude(const WaveformRecord& r, std::size_t n) {
    double amp = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        amp = std::max(amp, clarke({r.ref_a[k], r.ref_b[k], r.ref_c[k]}).norm());
    }
    return amp;
}

}  // namespace

WaveformRecord record_waveform(const ClosedLoopResult& run, const ScenarioConfig& sc) {
    WaveformRecord r;
    r.period = sc.ts;
    const std::size_t n = run.steps.size();
    const auto reserve = [n](std::vector<double>& v) { v.reserve(n); };
    reserve(r.v_c_a), reserve(r.v_c_b), reserve(r.v_c_c);
    reserve(r.i_o_a), reserve(r.i_o_b), reserve(r.i_o_c);
    reserve(r.i_f_a), reserve(r.i_f_b), reserve(r.i_f_c);
    reserve(r.ref_a), reserve(r.ref_b), reserve(r.ref_c);
    for (const StepTrace& s : run.steps) {
        const AbcTriple vc = inverse_clarke(s.v_c);
        const AbcTriple io = inverse_clarke(s.i_o);
        const AbcTriple ifab = inverse_clarke(s.i_f);
        const AbcTriple ref = inverse_clarke(s.v_ref);
        r.v_c_a.push_back(vc.a), r.v_c_b.push_back(vc.b), r.v_c_c.push_back(vc.c);
        r.i_o_a.push_back(io.a), r.i_o_b.push_back(io.b), r.i_o_c.push_back(io.c);
        r.i_f_a.push_back(ifab.a), r.i_f_b.push_back(ifab.b), r.i_f_c.push_back(ifab.c);
        r.ref_a.push_back(ref.a), r.ref_b.push_back(ref.b), r.ref_c.push_back(ref.c);
    }
    return r;
}

ThdReport thd(const std::vector<double>& signal, double period, double fundamental,
              int max_harmonic) {
    const double spc = samples_per_cycle(period, fundamental);
    if (max_harmonic < 2) throw std::invalid_argument("thd: max_harmonic must be >= 2");
    if (!(max_harmonic * fundamental < 0.5 / period)) {
        throw std::invalid_argument("thd: sample rate cannot resolve harmonic " +
                                    std::to_string(max_harmonic));
    }
    const std::size_t n = signal.size();
    const double cycles_f = static_cast<double>(n) / spc;
    const long long cycles = std::llround(cycles_f);
    if (cycles < 2 || std::abs(cycles_f - static_cast<double>(cycles)) > 1e-6) {
        throw std::invalid_argument(
            "thd: window must span a whole number (>= 2) of fundamental cycles, got " +
            format_double(cycles_f));
    }
    for (const double v : signal) {
        if (!std::isfinite(v)) throw std::invalid_argument("thd: non-finite sample");
    }

    ThdReport rep;
    rep.fundamental_hz = fundamental;
    rep.harmonic_amplitude.resize(static_cast<std::size_t>(max_harmonic), 0.0);
    double harmonic_power = 0.0;
    for (int h = 1; h <= max_harmonic; ++h) {
        // Harmonic h sits exactly on bin h*cycles; reduce the phase index
        // modulo n so the angle never grows.
        const long long bin = static_cast<long long>(h) * cycles;
        double re = 0.0;
        double im = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const long long idx = (bin * static_cast<long long>(k)) % static_cast<long long>(n);
            const double theta =
                2.0 * std::numbers::pi * static_cast<double>(idx) / static_cast<double>(n);
            re += signal[k] * std::cos(theta);
            im -= signal[k] * std::sin(theta);
        }
        const double amplitude = 2.0 * std::hypot(re, im) / static_cast<double>(n);
        rep.harmonic_amplitude[static_cast<std::size_t>(h - 1)] = amplitude;
        if (h >= 2) harmonic_power += amplitude * amplitude;
    }
    rep.fundamental_amplitude = rep.harmonic_amplitude[0];
    if (rep.fundamental_amplitude < kFundamentalFloor) {
        throw std::domain_error("thd: fundamental amplitude " +
                                format_double(rep.fundamental_amplitude) + " below threshold");
    }
    rep.thd = std::sqrt(harmonic_power) / rep.fundamental_amplitude;
    return rep;
}

std::optional<double> settling_time(const WaveformRecord& record, double tolerance_band,
                                    double fundamental) {
    const std::size_t n = record_length(record);
    if (!(tolerance_band > 0.0)) throw std::invalid_argument("tolerance band must be positive");
    const double spc = samples_per_cycle(record.period, fundamental);
    const auto hold = static_cast<std::size_t>(std::ceil(spc - 1e-9));
    if (n < hold || hold == 0) return std::nullopt;

    const double amplitude = reference_amplitude(record, n);
    if (!(amplitude > 0.0)) throw std::invalid_argument("reference amplitude must be positive");
    const double threshold = tolerance_band * amplitude;

    std::size_t run_start = 0;
    bool in_run = false;
    for (std::size_t k = 0; k < n; ++k) {
        if (tracking_error_at(record, k).norm() <= threshold) {
            if (!in_run) {
                in_run = true;
                run_start = k;
            }
            if (k + 1 - run_start >= hold) {
                return static_cast<double>(run_start) * record.period;
            }
        } else {
            in_run = false;
        }
    }
    return std::nullopt;
}

double rms_tracking_error(const WaveformRecord& record, double fundamental, int skip_cycles,
                          int cycles) {
    const std::size_t n = record_length(record);
    if (skip_cycles < 0 || cycles < 1) throw std::invalid_argument("bad tracking-error window");
    const double spc = samples_per_cycle(record.period, fundamental);
    const auto begin = static_cast<std::size_t>(std::llround(skip_cycles * spc));
    const auto count = static_cast<std::size_t>(std::llround(cycles * spc));
    if (begin + count > n) throw std::invalid_argument("tracking-error window exceeds record");

    const double amplitude = reference_amplitude(record, n);
    if (!(amplitude > 0.0)) throw std::invalid_argument("reference amplitude must be positive");
    double acc = 0.0;
    for (std::size_t k = begin; k < begin + count; ++k) {
        acc += tracking_error_at(record, k).squared_norm();
    }
    return std::sqrt(acc / static_cast<double>(count)) / amplitude;
}

int cycles_per_integer_window(double period, double fundamental) {
    const double spc = samples_per_cycle(period, fundamental);
    for (int q = 1; q <= 1000; ++q) {
        const double samples = q * spc;
        if (std::abs(samples - std::llround(samples)) <= 1e-6) return q;
    }
    throw std::invalid_argument("no whole-sample cycle window below 1000 cycles");
}

AnalysisWindow default_analysis_window(double period, double fundamental) {
    const int q = cycles_per_integer_window(period, fundamental);
    AnalysisWindow w;
    w.skip_cycles = 2;
    w.window_cycles = q * ((4 + q - 1) / q);
    return w;
}

std::vector<double> window_slice(const std::vector<double>& signal, double period,
                                 double fundamental, int skip_cycles, int cycles) {
    if (skip_cycles < 0 || cycles < 1) throw std::invalid_argument("bad window");
    const double spc = samples_per_cycle(period, fundamental);
    const auto begin = static_cast<std::size_t>(std::llround(skip_cycles * spc));
    const auto count = static_cast<std::size_t>(std::llround(cycles * spc));
    if (begin + count > signal.size()) {
        throw std::invalid_argument("window [" + std::to_string(skip_cycles) + "," +
                                    std::to_string(skip_cycles + cycles) +
                                    ") cycles exceeds the record");
    }
    return {signal.begin() + static_cast<std::ptrdiff_t>(begin),
            signal.begin() + static_cast<std::ptrdiff_t>(begin + count)};
}

namespace {

struct ControllerMetrics {
    std::optional<double> thd_percent;
    std::optional<double> settle_ms;
    std::vector<std::string> problems;
    WaveformRecord waveform;
};

ControllerMetrics reduce_run(const ClosedLoopResult& run, const ScenarioConfig& sc,
                             const AnalysisWindow& window, const ComparisonOptions& opt,
                             const std::string& tag) {
    ControllerMetrics m;
    m.waveform = record_waveform(run, sc);
    if (run.diverged) {
        m.problems.push_back(tag + "_diverged_at_" + std::to_string(run.last_good_step + 1));
        return m;
    }
    try {
        const std::vector<double> slice = window_slice(m.waveform.v_c_a, sc.ts, sc.frequency,
                                                       window.skip_cycles, window.window_cycles);
        m.thd_percent = 100.0 * thd(slice, sc.ts, sc.frequency, opt.max_harmonic).thd;
    } catch (const std::exception&) {
        m.problems.push_back(tag + "_thd_undefined");
    }
    try {
        const std::optional<double> settle =
            settling_time(m.waveform, opt.settle_band, sc.frequency);
        if (settle) {
            m.settle_ms = 1e3 * *settle;
        } else {
            m.problems.push_back(tag + "_never_settled");
        }
    } catch (const std::exception&) {
        m.problems.push_back(tag + "_settling_undefined");
    }
    return m;
}

}  // namespace

ComparisonOutput compare_controllers(const std::vector<ScenarioConfig>& scenarios,
                                     const MlpParameters& model, const ComparisonOptions& opt) {
    ComparisonOutput out;
    for (const ScenarioConfig& sc : scenarios) {
        ComparisonRow row;
        row.sample = sc.id;
        row.load_kind = load_kind_name(sc.load);
        row.load_params = load_params_string(sc.load);
        row.ts_us = sc.ts * 1e6;
        row.l_mh = sc.l * 1e3;
        row.c_uf = sc.c * 1e6;
        row.vdc = sc.vdc;
        row.vref = sc.vref_amplitude;

        const AnalysisWindow window = default_analysis_window(sc.ts, sc.frequency);
        ScenarioConfig run_sc = sc;
        run_sc.cycles = std::max(sc.cycles, window.skip_cycles + window.window_cycles);

        const ClosedLoopResult mpc_run = run_mpc_loop(run_sc, opt.loop);
        const ClosedLoopResult ann_run = run_ann_loop(run_sc, model, opt.loop, opt.ann);
        ControllerMetrics mpc = reduce_run(mpc_run, run_sc, window, opt, "mpc");
        ControllerMetrics ann = reduce_run(ann_run, run_sc, window, opt, "ann");

        row.thd_mpc = mpc.thd_percent;
        row.tss_mpc_ms = mpc.settle_ms;
        row.thd_ann = ann.thd_percent;
        row.tss_ann_ms = ann.settle_ms;
        std::vector<std::string> problems = std::move(mpc.problems);
        problems.insert(problems.end(), ann.problems.begin(), ann.problems.end());
        if (problems.empty()) {
            row.status = "ok";
        } else {
            std::string joined = problems.front();
            for (std::size_t i = 1; i < problems.size(); ++i) joined += "|" + problems[i];
            row.status = std::move(joined);
        }
        out.rows.push_back(std::move(row));
        if (opt.keep_waveforms) {
            out.mpc_waveforms.push_back(std::move(mpc.waveform));
            out.ann_waveforms.push_back(std::move(ann.waveform));
        }
    }
    return out;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
    std::ostringstream body;
    body << "sample,load_kind,load_params,ts_us,l_mh,c_uf,vdc,vref,thd_ann,thd_mpc,"
            "tss_mpc_ms,tss_ann_ms,status\n";
    const auto cell = [](const std::optional<double>& v) {
        return v ? format_double(*v) : std::string{};
    };
    for (const ComparisonRow& r : rows) {
        body << r.sample << ',' << r.load_kind << ',' << r.load_params << ','
             << format_double(r.ts_us) << ',' << format_double(r.l_mh) << ','
             << format_double(r.c_uf) << ',' << format_double(r.vdc) << ','
             << format_double(r.vref) << ',' << cell(r.thd_ann) << ',' << cell(r.thd_mpc) << ','
             << cell(r.tss_mpc_ms) << ',' << cell(r.tss_ann_ms) << ',' << r.status << '\n';
    }
    return std::move(body).str();
}

}  // namespace invctl
