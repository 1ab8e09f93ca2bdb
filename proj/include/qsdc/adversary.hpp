#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "qsdc/errors.hpp"
#include "qsdc/qcore.hpp"
#include "qsdc/rng.hpp"

namespace qsdc {

// Eavesdropper strategy interposed on the quantum channel and/or standing in
// for one of the parties. Exactly one variant is active per run.
struct AttackStrategy {
    enum class Kind {
        None,
        ImpersonateAlice,
        ImpersonateBob,
        InterceptResend,
        ManInTheMiddle,
        EntangleMeasure,
    };
    enum class Substitute { RandomComputational, RandomPure };

    Kind kind = Kind::None;

    // InterceptResend: Bloch angles of Eve's measurement basis
    // |u> = cos(θ/2)|0> + e^{iφ} sin(θ/2)|1>.
    double theta = 0.0;
    double phi = 0.0;

    // ManInTheMiddle: what Eve forwards instead of the intercepted qubits.
    Substitute substitute = Substitute::RandomComputational;

    // EntangleMeasure: measure the ancilla right after coupling (true) or
    // leave it until after the receiver's operations (false).
    bool measure_ancilla_immediately = true;

    bool active_on_channel() const {
        return kind == Kind::InterceptResend || kind == Kind::ManInTheMiddle ||
               kind == Kind::EntangleMeasure;
    }

    static AttackStrategy none() { return {}; }

    static AttackStrategy intercept_resend(double theta_, double phi_) {
        AttackStrategy a;
        a.kind = Kind::InterceptResend;
        a.theta = theta_;
        a.phi = phi_;
        return a;
    }

    static AttackStrategy mitm(Substitute sub) {
        AttackStrategy a;
        a.kind = Kind::ManInTheMiddle;
        a.substitute = sub;
        return a;
    }

    static AttackStrategy entangle_measure(bool immediate = true) {
        AttackStrategy a;
        a.kind = Kind::EntangleMeasure;
        a.measure_ancilla_immediately = immediate;
        return a;
    }

    static AttackStrategy impersonate_alice() {
        AttackStrategy a;
        a.kind = Kind::ImpersonateAlice;
        return a;
    }

    static AttackStrategy impersonate_bob() {
        AttackStrategy a;
        a.kind = Kind::ImpersonateBob;
        return a;
    }

    std::string name() const {
        switch (kind) {
            case Kind::None: return "none";
            case Kind::ImpersonateAlice: return "impersonate-alice";
            case Kind::ImpersonateBob: return "impersonate-bob";
            case Kind::InterceptResend: return "intercept-resend";
            case Kind::ManInTheMiddle:
                return substitute == Substitute::RandomComputational ? "mitm-computational"
                                                                     : "mitm-pure";
            case Kind::EntangleMeasure: return "entangle-measure";
        }
        return "?";
    }

    static AttackStrategy parse(const std::string& name) {
        if (name == "none") return none();
        if (name == "impersonate-alice") return impersonate_alice();
        if (name == "impersonate-bob") return impersonate_bob();
        if (name == "intercept-resend") return intercept_resend(0.0, 0.0);
        if (name == "mitm-computational") return mitm(Substitute::RandomComputational);
        if (name == "mitm-pure") return mitm(Substitute::RandomPure);
        if (name == "entangle-measure") return entangle_measure();
        throw ConfigError("unknown attack strategy: " + name);
    }
};

// What Eve learns from channel-level interference on one pair.
struct EveRecord {
    std::vector<int> intercept_outcomes;  // ±1 per intercepted qubit
    std::vector<int> ancilla_bits;        // 0/1 per measured ancilla
};

// Projective measurement of the transiting qubit in Eve's {|u>,|v>} basis;
// the qubit is forwarded collapsed.
inline int intercept_resend(StateVector& state, int qubit, double theta, double phi, Rng& rng) {
    const cplx u0 = std::cos(0.5 * theta);
    const cplx u1 = std::exp(cplx(0.0, phi)) * std::sin(0.5 * theta);
    return state.measure_in_basis(qubit, u0, u1, rng);
}

// Eve keeps the intercepted qubit and forwards a fresh uncorrelated one. The
// kept qubit never interacts again, so for everything downstream it is
// equivalent to collapse it in the computational basis and overwrite the
// transit slot with Eve's substitute state.
inline void mitm_substitute(StateVector& pair, int transit_qubit,
                            AttackStrategy::Substitute kind, Rng& rng) {
    pair.measure_computational(transit_qubit, rng);
    cplx u0, u1;
    if (kind == AttackStrategy::Substitute::RandomComputational) {
        const bool one = uniform01(rng) < 0.5;
        u0 = one ? cplx(0) : cplx(1);
        u1 = one ? cplx(1) : cplx(0);
    } else {
        // Haar-random pure qubit.
        const double z = 2.0 * uniform01(rng) - 1.0;
        const double ph = 2.0 * std::numbers::pi * uniform01(rng);
        const double th = std::acos(z);
        u0 = std::cos(0.5 * th);
        u1 = std::exp(cplx(0.0, ph)) * std::sin(0.5 * th);
    }
    // Project the transit slot onto the fresh state: since it is already
    // collapsed to a basis state, rebuilding the product state is exact.
    const std::size_t mask = std::size_t{1} << transit_qubit;
    std::vector<cplx> amps(pair.amplitudes());
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if (i & mask) continue;
        const cplx rest = amps[i] + amps[i | mask];  // one of the two is zero
        amps[i] = rest * u0;
        amps[i | mask] = rest * u1;
    }
    pair = StateVector(pair.num_qubits());
    // No public setter by design; rebuild through unitary-free assignment helper.
    pair.overwrite_amplitudes(std::move(amps));
}

// Appends an ancilla in |0>, couples it to the transiting qubit with a
// controlled-NOT, and optionally measures it straight away.
inline void entangle_measure(StateVector& state, int transit_qubit, bool measure_now,
                             EveRecord& record, Rng& rng) {
    state.append_qubit();
    const int ancilla = state.num_qubits() - 1;
    state.apply_two_qubit(transit_qubit, ancilla, kCnot);
    if (measure_now) record.ancilla_bits.push_back(state.measure_computational(ancilla, rng));
}

// Applies the channel-level part of a strategy to one transiting qubit.
inline void apply_channel_attack(StateVector& pair, int transit_qubit,
                                 const AttackStrategy& attack, EveRecord& record, Rng& rng) {
    switch (attack.kind) {
        case AttackStrategy::Kind::InterceptResend:
            record.intercept_outcomes.push_back(
                intercept_resend(pair, transit_qubit, attack.theta, attack.phi, rng));
            break;
        case AttackStrategy::Kind::ManInTheMiddle:
            mitm_substitute(pair, transit_qubit, attack.substitute, rng);
            break;
        case AttackStrategy::Kind::EntangleMeasure:
            entangle_measure(pair, transit_qubit, attack.measure_ancilla_immediately, record, rng);
            break;
        default:
            break;
    }
}

struct LeakageVerdict {
    bool pass = false;
    std::string reason;
};

// Byte-for-byte audit over serialized transcripts of runs that share seed and
// config and differ only in the message: any divergence marks leakage.
inline LeakageVerdict leakage_audit(const std::vector<std::string>& transcripts) {
    if (transcripts.size() < 2)
        throw ConfigError("leakage_audit needs at least two transcripts");
    for (std::size_t i = 1; i < transcripts.size(); ++i) {
        if (transcripts[i] != transcripts[0]) {
            return {false, "transcript " + std::to_string(i) +
                               " diverges from transcript 0: message-correlated bytes"};
        }
    }
    return {true, "all transcripts byte-identical"};
}

}  // namespace qsdc
