#pragma once

#include <string>

#include <json.hpp>

#include "qsdc/adversary.hpp"
#include "qsdc/errors.hpp"
#include "qsdc/noise.hpp"
#include "qsdc/protocol.hpp"

namespace qsdc {

using json = nlohmann::json;

inline void to_json(json& j, const NoiseModel& m) {
    j = json{{"p_gate", m.p_gate},
             {"error_mix", m.error_mix},
             {"p_readout", m.p_readout},
             {"eta", m.eta},
             {"gate_time_ns", m.gate_time_ns}};
}

inline void from_json(const json& j, NoiseModel& m) {
    m = NoiseModel{};
    if (j.contains("p_gate")) j.at("p_gate").get_to(m.p_gate);
    if (j.contains("error_mix")) j.at("error_mix").get_to(m.error_mix);
    if (j.contains("p_readout")) j.at("p_readout").get_to(m.p_readout);
    if (j.contains("eta")) j.at("eta").get_to(m.eta);
    if (j.contains("gate_time_ns")) j.at("gate_time_ns").get_to(m.gate_time_ns);
    m.validate();
}

inline void to_json(json& j, const AttackStrategy& a) {
    j = json{{"variant", a.name()}};
    if (a.kind == AttackStrategy::Kind::InterceptResend) {
        j["theta"] = a.theta;
        j["phi"] = a.phi;
    }
    if (a.kind == AttackStrategy::Kind::EntangleMeasure)
        j["measure_ancilla_immediately"] = a.measure_ancilla_immediately;
}

inline void from_json(const json& j, AttackStrategy& a) {
    a = AttackStrategy::parse(j.value("variant", "none"));
    if (j.contains("theta")) j.at("theta").get_to(a.theta);
    if (j.contains("phi")) j.at("phi").get_to(a.phi);
    if (j.contains("measure_ancilla_immediately"))
        j.at("measure_ancilla_immediately").get_to(a.measure_ancilla_immediately);
}

inline void to_json(json& j, const ProtocolConfig& c) {
    j = json{{"n", c.n},
             {"c", c.c},
             {"l", c.l},
             {"d", c.d},
             {"epsilon1", c.epsilon1},
             {"epsilon2", c.epsilon2},
             {"auth_mismatch_tolerance", c.auth_mismatch_tolerance},
             {"checkbit_error_tolerance", c.checkbit_error_tolerance},
             {"noise", c.noise},
             {"storage_eta", c.storage_eta},
             {"seed", c.seed}};
}

inline void from_json(const json& j, ProtocolConfig& c) {
    c = ProtocolConfig{};
    if (j.contains("n")) j.at("n").get_to(c.n);
    if (j.contains("c")) j.at("c").get_to(c.c);
    if (j.contains("l")) j.at("l").get_to(c.l);
    if (j.contains("d")) j.at("d").get_to(c.d);
    if (j.contains("epsilon1")) j.at("epsilon1").get_to(c.epsilon1);
    if (j.contains("epsilon2")) j.at("epsilon2").get_to(c.epsilon2);
    if (j.contains("auth_mismatch_tolerance"))
        j.at("auth_mismatch_tolerance").get_to(c.auth_mismatch_tolerance);
    if (j.contains("checkbit_error_tolerance"))
        j.at("checkbit_error_tolerance").get_to(c.checkbit_error_tolerance);
    if (j.contains("noise")) j.at("noise").get_to(c.noise);
    if (j.contains("storage_eta")) j.at("storage_eta").get_to(c.storage_eta);
    if (j.contains("seed")) j.at("seed").get_to(c.seed);
    c.validate();
}

inline json parse_json_or_throw(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("invalid JSON configuration");
    return j;
}

}  // namespace qsdc
