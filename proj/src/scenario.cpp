#include "invctl/scenario.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace invctl {

namespace {

struct KindName {
    const char* name;
};

KindName kind_of(const LoadModel& load) {
    struct Visitor {
        KindName operator()(const Resistive&) const { return {"resistive"}; }
        KindName operator()(const OpenCircuit&) const { return {"open_circuit"}; }
        KindName operator()(const Inductive&) const { return {"inductive"}; }
        KindName operator()(const DiodeBridgeRectifier&) const { return {"rectifier"}; }
        KindName operator()(const ConstantCurrent&) const { return {"constant_current"}; }
    };
    return std::visit(Visitor{}, load);
}

std::string trim_number(double v) {
    std::string s = std::to_string(v);
    const auto dot = s.find('.');
    if (dot == std::string::npos) return s;
    auto last = s.find_last_not_of('0');
    if (last == dot) --last;
    return s.substr(0, last + 1);
}

double require_number(const nlohmann::json& j, const std::string& key,
                      const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw std::runtime_error(where + ": missing or non-numeric key '" + key + "'");
    }
    return j.at(key).get<double>();
}

LoadModel parse_load(const nlohmann::json& j, const std::string& where) {
    if (!j.contains("load") || !j.at("load").is_object()) {
        throw std::runtime_error(where + ": missing 'load' object");
    }
    const nlohmann::json& load = j.at("load");
    const std::string kind = load.value("kind", std::string{});
    if (kind == "resistive") return Resistive{require_number(load, "r_ohm", where)};
    if (kind == "open_circuit") return OpenCircuit{};
    if (kind == "inductive") return Inductive{require_number(load, "l_mh", where) * 1e-3};
    if (kind == "rectifier") {
        return DiodeBridgeRectifier{require_number(load, "r_nl_ohm", where),
                                    require_number(load, "c_nl_uf", where) * 1e-6};
    }
    throw std::runtime_error(where + ": unknown load kind '" + kind + "'");
}

}  // namespace

void ScenarioConfig::validate() const {
    const std::string where = "scenario '" + id + "'";
    try {
        filter().validate();
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(where + ": " + e.what());
    }
    if (!(vref_amplitude > 0.0)) throw std::invalid_argument(where + ": vref must be positive");
    if (!(frequency > 0.0)) throw std::invalid_argument(where + ": frequency must be positive");
    if (cycles < 1) throw std::invalid_argument(where + ": cycles must be >= 1");
    if (!(ts * frequency < 0.5)) {
        throw std::invalid_argument(where + ": sampling period too long for the fundamental");
    }
    struct Visitor {
        const std::string& where;
        void operator()(const Resistive& r) const {
            if (!(r.r > 0.0)) throw std::invalid_argument(where + ": load resistance must be positive");
        }
        void operator()(const OpenCircuit&) const {}
        void operator()(const Inductive& l) const {
            if (!(l.l_load > 0.0)) {
                throw std::invalid_argument(where + ": load inductance must be positive");
            }
        }
        void operator()(const DiodeBridgeRectifier& d) const {
            if (!(d.r_nl > 0.0) || !(d.c_nl > 0.0)) {
                throw std::invalid_argument(where + ": rectifier RC values must be positive");
            }
        }
        void operator()(const ConstantCurrent&) const {}
    };
    std::visit(Visitor{where}, load);
}

std::string load_kind_name(const LoadModel& load) { return kind_of(load).name; }

std::string load_params_string(const LoadModel& load) {
    struct Visitor {
        std::string operator()(const Resistive& r) const { return "r_ohm=" + trim_number(r.r); }
        std::string operator()(const OpenCircuit&) const { return ""; }
        std::string operator()(const Inductive& l) const {
            return "l_mh=" + trim_number(l.l_load * 1e3);
        }
        std::string operator()(const DiodeBridgeRectifier& d) const {
            return "r_nl_ohm=" + trim_number(d.r_nl) + "|c_nl_uf=" + trim_number(d.c_nl * 1e6);
        }
        std::string operator()(const ConstantCurrent& c) const {
            return "i_a=" + trim_number(c.i.alpha) + "|i_b=" + trim_number(c.i.beta);
        }
    };
    return std::visit(Visitor{}, load);
}

std::vector<ScenarioConfig> load_scenarios(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("scenario file " + path + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("scenarios") || !doc.at("scenarios").is_array()) {
        throw std::runtime_error("scenario file " + path + ": expected {\"scenarios\": [...]}");
    }

    std::vector<ScenarioConfig> out;
    std::size_t index = 0;
    for (const nlohmann::json& entry : doc.at("scenarios")) {
        const std::string fallback = "#" + std::to_string(index);
        const std::string where =
            path + " scenario " + (entry.is_object() ? entry.value("id", fallback) : fallback);
        if (!entry.is_object()) throw std::runtime_error(where + ": entry must be an object");

        ScenarioConfig sc;
        sc.id = entry.value("id", fallback);
        sc.load = parse_load(entry, where);
        sc.ts = require_number(entry, "ts_us", where) * 1e-6;
        sc.l = require_number(entry, "l_mh", where) * 1e-3;
        sc.c = require_number(entry, "c_uf", where) * 1e-6;
        sc.vdc = require_number(entry, "vdc_v", where);
        sc.vref_amplitude = require_number(entry, "vref_v", where);
        sc.frequency = require_number(entry, "freq_hz", where);
        sc.cycles = entry.value("cycles", 8);
        try {
            sc.validate();
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(path + ": " + e.what());
        }
        out.push_back(std::move(sc));
        ++index;
    }
    return out;
}

}  // namespace invctl
