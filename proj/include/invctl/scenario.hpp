#pragma once

#include <string>
#include <vector>

#include "invctl/plant.hpp"

namespace invctl {

/// One experiment row: converter condition, load, reference, and duration.
struct ScenarioConfig {
    std::string id;
    LoadModel load = OpenCircuit{};
    double ts = 30e-6;              ///< sampling period [s]
    double l = 2e-3;                ///< filter inductance [H]
    double c = 40e-6;               ///< filter capacitance [F]
    double vdc = 500.0;             ///< DC-link voltage [V]
    double vref_amplitude = 200.0;  ///< reference voltage amplitude [V]
    double frequency = 50.0;        ///< reference fundamental [Hz]
    int cycles = 8;                 ///< fundamental cycles to simulate

    FilterParams filter() const { return FilterParams{l, c, ts, vdc}; }

    /// Throws std::invalid_argument naming the scenario on any bad value.
    void validate() const;
};

/// Scenario-table strings for reports: "resistive", "r_ohm=10", ...
std::string load_kind_name(const LoadModel& load);
std::string load_params_string(const LoadModel& load);

/// Reads a scenario file: a JSON object {"scenarios": [...]} whose entries
/// use unit-suffixed keys (ts_us, l_mh, c_uf, vdc_v, vref_v, freq_hz) and a
/// nested load object ({"kind": "resistive", "r_ohm": 10}). "cycles" is
/// optional and defaults to 8. Throws std::runtime_error with the file and
/// scenario named on any parse or validation problem.
std::vector<ScenarioConfig> load_scenarios(const std::string& path);

}  // namespace invctl
