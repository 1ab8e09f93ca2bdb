#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "qsdc/adversary.hpp"
#include "qsdc/chsh.hpp"
#include "qsdc/errors.hpp"
#include "qsdc/noise.hpp"
#include "qsdc/qcore.hpp"
#include "qsdc/rng.hpp"

namespace qsdc {

using Bits = std::vector<std::uint8_t>;

inline Bits bits_from_string(const std::string& s) {
    Bits b;
    b.reserve(s.size());
    for (char ch : s) {
        if (ch != '0' && ch != '1') throw ConfigError("bit string must contain only 0/1");
        b.push_back(ch == '1' ? 1 : 0);
    }
    return b;
}

inline std::string bits_to_string(const Bits& b) {
    std::string s;
    s.reserve(b.size());
    for (auto v : b) s.push_back(v ? '1' : '0');
    return s;
}

inline Bits random_bits(std::size_t n, Rng& rng) {
    Bits b(n);
    for (auto& v : b) v = uniform01(rng) < 0.5 ? 1 : 0;
    return b;
}

// Two-bit value packed big-endian: "b1 b2" -> b1*2 + b2.
inline PauliOp encode_two_bits(int two_bits) {
    if (two_bits < 0 || two_bits > 3) throw ConfigError("encode_two_bits: value out of range");
    // 00->I, 01->Z, 10->X, 11->iY
    return static_cast<PauliOp>(two_bits);
}

inline int decode_bell_to_bits(BellState b) { return static_cast<int>(bell_to_pauli(b)); }

// Bell outcome Bob announces for a BobId pair, given Alice's cover op and the
// two id_B bits Bob encodes: (P ⊗ Q)|Φ+> = (P Q^T ⊗ I)|Φ+>.
inline BellState expected_bobid_outcome(PauliOp cover, int idb_two_bits) {
    return pauli_to_bell(compose_pauli(cover, transpose_class(encode_two_bits(idb_two_bits))));
}

struct ProtocolConfig {
    int n = 16;  // message bits
    int c = 16;  // check bits, n + c = 2N even
    int l = 8;   // identities are 2l bits
    int d = 1000;  // pairs per CHSH round
    double epsilon1 = 0.6;
    double epsilon2 = 0.6;
    double auth_mismatch_tolerance = 0.0;
    double checkbit_error_tolerance = 0.1;
    NoiseModel noise;
    int storage_eta = 0;  // optional storage-noise hook, off by default
    std::uint64_t seed = 1;

    // Fault-injection hook used by the leakage-audit tests only: announces
    // Message-pair outcomes on the classical channel, which must be flagged.
    bool leak_message_outcomes = false;

    int big_n() const { return (n + c) / 2; }
    int total_pairs() const { return big_n() + 2 * l + 2 * d; }

    void validate() const {
        if (n < 0 || c < 0 || (n + c) % 2 != 0 || n + c == 0)
            throw ConfigError("n + c must be positive and even");
        if (l < 1) throw ConfigError("l must be >= 1");
        if (d < 1) throw ConfigError("d must be >= 1");
        const double eps_max = 2.0 * (std::numbers::sqrt2 - 1.0);
        if (epsilon1 <= 0.0 || epsilon1 >= eps_max || epsilon2 <= 0.0 || epsilon2 >= eps_max)
            throw ConfigError("epsilon parameters must lie in (0, 2(sqrt(2)-1))");
        if (auth_mismatch_tolerance < 0.0 || auth_mismatch_tolerance >= 1.0)
            throw ConfigError("auth_mismatch_tolerance must be in [0,1)");
        if (checkbit_error_tolerance < 0.0 || checkbit_error_tolerance > 1.0)
            throw ConfigError("checkbit_error_tolerance must be in [0,1]");
        if (storage_eta < 0) throw ConfigError("storage_eta must be >= 0");
        noise.validate();
    }
};

struct Identity {
    Bits bits;  // length 2l, never serialized into the transcript
};

enum class PairRole { Check1, Check2, Message, AliceId, BobId };

struct PairRecord {
    PairRole role = PairRole::Message;
    StateVector state = StateVector::bell_pair();
    PauliOp alice_op = PauliOp::I;  // message/id encoding, or cover op on BobId pairs
    PauliOp bob_op = PauliOp::I;    // Bob's id encoding on BobId pairs
    bool measured = false;
    BellState outcome = BellState::PhiPlus;
};

// Per-pair record of roles, applied operations and measured outcomes.
struct PairLedger {
    std::vector<PairRecord> pairs;
    std::vector<int> check1, check2, message, alice_id, bob_id;  // sorted positions
};

struct TranscriptEntry {
    char sender;  // 'A' or 'B'
    std::string kind;
    std::string payload;
};

// Ordered public classical-channel record; the object audited for leakage.
struct Transcript {
    std::vector<TranscriptEntry> entries;

    void add(char sender, std::string kind, std::string payload = {}) {
        entries.push_back({sender, std::move(kind), std::move(payload)});
    }

    std::string serialize() const {
        std::string out;
        for (const auto& e : entries) {
            out += e.sender;
            out += '\t';
            out += e.kind;
            out += '\t';
            out += e.payload;
            out += '\n';
        }
        return out;
    }

    bool has_kind(const std::string& kind) const {
        return std::any_of(entries.begin(), entries.end(),
                           [&](const TranscriptEntry& e) { return e.kind == kind; });
    }
};

enum class Status {
    Delivered,
    AbortChsh1,
    AbortChsh2,
    AbortAuthBob,
    AbortAuthAlice,
    AbortCheckBits,
};

inline const char* to_string(Status s) {
    switch (s) {
        case Status::Delivered: return "delivered";
        case Status::AbortChsh1: return "abort-chsh1";
        case Status::AbortChsh2: return "abort-chsh2";
        case Status::AbortAuthBob: return "abort-auth-bob";
        case Status::AbortAuthAlice: return "abort-auth-alice";
        case Status::AbortCheckBits: return "abort-check-bits";
    }
    return "?";
}

struct ProtocolOutcome {
    Status status = Status::Delivered;
    std::optional<Bits> delivered_message;  // present iff status == Delivered
    double s1 = 0.0, s1_se = 0.0;
    double s2 = 0.0, s2_se = 0.0;
    bool s1_valid = false, s2_valid = false;
    double qber = -1.0;
    int auth_bob_mismatches = -1;
    int auth_alice_mismatches = -1;
    Bits decoded_mprime;  // diagnostics; filled once decoding is reached
    Transcript transcript;
    EveRecord eve;
};

struct CheckBitPlan {
    Bits m_prime;
    std::vector<int> positions;  // sorted insertion positions in m_prime
    Bits values;                 // value at each position
};

// Inserts c uniformly random check bits at uniformly random positions of m.
inline CheckBitPlan insert_check_bits(const Bits& m, int c, Rng& rng) {
    if ((m.size() + c) % 2 != 0) throw ConfigError("insert_check_bits: n + c must be even");
    const int total = static_cast<int>(m.size()) + c;
    std::vector<int> idx(total);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<int> positions(idx.begin(), idx.begin() + c);
    std::sort(positions.begin(), positions.end());

    CheckBitPlan plan;
    plan.positions = positions;
    plan.m_prime.resize(total);
    std::vector<bool> is_check(total, false);
    for (int p : positions) is_check[p] = true;
    std::size_t mi = 0;
    for (int i = 0; i < total; ++i) {
        if (is_check[i]) {
            const std::uint8_t v = uniform01(rng) < 0.5 ? 1 : 0;
            plan.m_prime[i] = v;
            plan.values.push_back(v);
        } else {
            plan.m_prime[i] = m[mi++];
        }
    }
    return plan;
}

inline Bits remove_check_bits(const Bits& m_prime, const std::vector<int>& positions) {
    Bits out;
    out.reserve(m_prime.size() - positions.size());
    std::size_t pi = 0;
    for (std::size_t i = 0; i < m_prime.size(); ++i) {
        if (pi < positions.size() && static_cast<int>(i) == positions[pi]) {
            ++pi;
            continue;
        }
        out.push_back(m_prime[i]);
    }
    return out;
}

struct AuthVerdict {
    bool accept = false;
    int mismatches = 0;
};

// Alice checks Bob's announced Bell outcomes against cover ∘ id_B.
inline AuthVerdict alice_verify_bob(const std::vector<BellState>& announced,
                                    const std::vector<PauliOp>& cover_ops, const Identity& id_b,
                                    double tolerance) {
    if (announced.size() != cover_ops.size() || id_b.bits.size() != 2 * announced.size())
        throw ConfigError("alice_verify_bob: length mismatch");
    AuthVerdict v;
    for (std::size_t i = 0; i < announced.size(); ++i) {
        const int two = id_b.bits[2 * i] * 2 + id_b.bits[2 * i + 1];
        if (announced[i] != expected_bobid_outcome(cover_ops[i], two)) ++v.mismatches;
    }
    v.accept = announced.empty() ||
               static_cast<double>(v.mismatches) / announced.size() <= tolerance;
    return v;
}

namespace detail {

inline std::string fmt_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.9f", v);
    return buf;
}

inline std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

}  // namespace detail

// Executes protocol steps 1-6 in order with early aborts. Deterministic given
// config.seed, the message, the identities, and the attack strategy. When the
// identities are not supplied they are drawn from the run's seeded generator
// (they model a pre-shared secret either way).
inline ProtocolOutcome run_protocol(const ProtocolConfig& cfg, const Bits& message,
                                    const AttackStrategy& attack = {},
                                    std::optional<Identity> id_a = std::nullopt,
                                    std::optional<Identity> id_b = std::nullopt) {
    cfg.validate();
    if (static_cast<int>(message.size()) != cfg.n)
        throw ConfigError("message length must equal n");

    Rng rng = make_rng(cfg.seed);
    ProtocolOutcome out;

    if (!id_a) id_a = Identity{random_bits(2 * cfg.l, rng)};
    if (!id_b) id_b = Identity{random_bits(2 * cfg.l, rng)};
    if (static_cast<int>(id_a->bits.size()) != 2 * cfg.l ||
        static_cast<int>(id_b->bits.size()) != 2 * cfg.l)
        throw ConfigError("identities must be 2l bits long");

    const CheckBitPlan plan = insert_check_bits(message, cfg.c, rng);

    // Step 1: entanglement sharing.
    const int total = cfg.total_pairs();
    PairLedger ledger;
    ledger.pairs.resize(total);

    // Step 2: first round of the DI-security check, on d announced positions.
    std::vector<int> all_idx(total);
    std::iota(all_idx.begin(), all_idx.end(), 0);
    std::shuffle(all_idx.begin(), all_idx.end(), rng);
    ledger.check1.assign(all_idx.begin(), all_idx.begin() + cfg.d);
    std::sort(ledger.check1.begin(), ledger.check1.end());
    for (int p : ledger.check1) ledger.pairs[p].role = PairRole::Check1;
    out.transcript.add('A', "chsh1_positions", detail::join_ints(ledger.check1));

    {
        ChshAccumulator acc;
        std::string ja, kb, oa, ob;
        for (int p : ledger.check1) {
            PairRecord& pr = ledger.pairs[p];
            const ChshSample s = chsh_sample_pair(pr.state, 0, 1, cfg.noise, rng);
            pr.measured = true;
            acc.add(s.j, s.k, s.a, s.b);
            ja += static_cast<char>('0' + s.j);
            kb += static_cast<char>('0' + s.k);
            oa += (s.a > 0 ? '+' : '-');
            ob += (s.b > 0 ? '+' : '-');
        }
        out.transcript.add('A', "chsh1_bases", ja);
        out.transcript.add('B', "chsh1_bases", kb);
        out.transcript.add('A', "chsh1_outcomes", oa);
        out.transcript.add('B', "chsh1_outcomes", ob);
        const ChshEstimate est = acc.estimate();
        out.s1 = est.s;
        out.s1_se = est.se;
        out.s1_valid = true;
        if (!chsh_threshold_check(est.s, cfg.epsilon1)) {
            out.transcript.add('A', "chsh1_verdict", "abort;s=" + detail::fmt_double(est.s));
            out.status = Status::AbortChsh1;
            return out;
        }
        out.transcript.add('A', "chsh1_verdict", "continue;s=" + detail::fmt_double(est.s));
    }

    // Optional storage noise on the pairs held between the check rounds.
    if (cfg.storage_eta > 0) {
        NoiseModel storage = cfg.noise;
        storage.eta = cfg.storage_eta;
        storage.p_readout = 0.0;
        for (int p = 0; p < total; ++p) {
            if (ledger.pairs[p].role == PairRole::Check1) continue;
            transmit(ledger.pairs[p].state, 0, storage, rng);
            transmit(ledger.pairs[p].state, 1, storage, rng);
        }
    }

    // Step 3: role assignment and Alice's encoding.
    {
        std::vector<int> remaining;
        remaining.reserve(total - cfg.d);
        for (int p : all_idx)
            if (ledger.pairs[p].role != PairRole::Check1) remaining.push_back(p);
        std::shuffle(remaining.begin(), remaining.end(), rng);
        auto it = remaining.begin();
        ledger.check2.assign(it, it + cfg.d);
        it += cfg.d;
        ledger.message.assign(it, it + cfg.big_n());
        it += cfg.big_n();
        ledger.alice_id.assign(it, it + cfg.l);
        it += cfg.l;
        ledger.bob_id.assign(it, it + cfg.l);
        std::sort(ledger.check2.begin(), ledger.check2.end());
        std::sort(ledger.message.begin(), ledger.message.end());
        std::sort(ledger.alice_id.begin(), ledger.alice_id.end());
        std::sort(ledger.bob_id.begin(), ledger.bob_id.end());
        for (int p : ledger.check2) ledger.pairs[p].role = PairRole::Check2;
        for (int p : ledger.message) ledger.pairs[p].role = PairRole::Message;
        for (int p : ledger.alice_id) ledger.pairs[p].role = PairRole::AliceId;
        for (int p : ledger.bob_id) ledger.pairs[p].role = PairRole::BobId;
    }

    const bool eve_is_alice = attack.kind == AttackStrategy::Kind::ImpersonateAlice;
    const bool eve_is_bob = attack.kind == AttackStrategy::Kind::ImpersonateBob;

    for (std::size_t i = 0; i < ledger.message.size(); ++i) {
        const int two = plan.m_prime[2 * i] * 2 + plan.m_prime[2 * i + 1];
        PairRecord& pr = ledger.pairs[ledger.message[i]];
        pr.alice_op = encode_two_bits(two);
        pr.state.apply_pauli(0, pr.alice_op);
    }
    for (std::size_t i = 0; i < ledger.alice_id.size(); ++i) {
        PairRecord& pr = ledger.pairs[ledger.alice_id[i]];
        if (eve_is_alice) {
            // Eve does not know id_A: a uniformly random Pauli instead.
            pr.alice_op = static_cast<PauliOp>(static_cast<int>(uniform01(rng) * 4.0));
        } else {
            const int two = id_a->bits[2 * i] * 2 + id_a->bits[2 * i + 1];
            pr.alice_op = encode_two_bits(two);
        }
        pr.state.apply_pauli(0, pr.alice_op);
    }
    for (int p : ledger.bob_id) {
        PairRecord& pr = ledger.pairs[p];
        pr.alice_op = static_cast<PauliOp>(static_cast<int>(uniform01(rng) * 4.0));  // cover op
        pr.state.apply_pauli(0, pr.alice_op);
    }

    // Step 4a: transit of Alice's qubits through the (possibly attacked) channel.
    for (int p = 0; p < total; ++p) {
        PairRecord& pr = ledger.pairs[p];
        if (pr.role == PairRole::Check1) continue;
        apply_channel_attack(pr.state, 0, attack, out.eve, rng);
        transmit(pr.state, 0, cfg.noise, rng);
    }

    // Step 4b: Bob proves his identity on the announced BobId pairs.
    out.transcript.add('A', "bobid_positions", detail::join_ints(ledger.bob_id));
    std::vector<BellState> announced;
    std::vector<PauliOp> covers;
    {
        std::string payload;
        for (std::size_t i = 0; i < ledger.bob_id.size(); ++i) {
            PairRecord& pr = ledger.pairs[ledger.bob_id[i]];
            if (eve_is_bob) {
                // Eve does not know id_B: a uniformly random Pauli instead.
                pr.bob_op = static_cast<PauliOp>(static_cast<int>(uniform01(rng) * 4.0));
            } else {
                const int two = id_b->bits[2 * i] * 2 + id_b->bits[2 * i + 1];
                pr.bob_op = encode_two_bits(two);
            }
            pr.state.apply_pauli(1, pr.bob_op);
            pr.outcome = pr.state.bell_measurement(0, 1, rng);
            pr.measured = true;
            announced.push_back(pr.outcome);
            covers.push_back(pr.alice_op);
            if (i) payload += ',';
            payload += to_string(pr.outcome);
        }
        out.transcript.add('B', "bobid_outcomes", payload);
    }
    if (!eve_is_alice) {  // an impersonating sender cannot check id_B and plays along
        const AuthVerdict v =
            alice_verify_bob(announced, covers, *id_b, cfg.auth_mismatch_tolerance);
        out.auth_bob_mismatches = v.mismatches;
        if (!v.accept) {
            out.transcript.add('A', "auth_bob_verdict",
                               "reject;mismatches=" + std::to_string(v.mismatches));
            out.status = Status::AbortAuthBob;
            return out;
        }
        out.transcript.add('A', "auth_bob_verdict",
                           "accept;mismatches=" + std::to_string(v.mismatches));
    } else {
        out.transcript.add('A', "auth_bob_verdict", "accept;mismatches=0");
    }

    // Step 4c: Bob verifies Alice's identity; outcomes stay off the transcript.
    out.transcript.add('A', "aliceid_positions", detail::join_ints(ledger.alice_id));
    {
        int mismatches = 0;
        for (std::size_t i = 0; i < ledger.alice_id.size(); ++i) {
            PairRecord& pr = ledger.pairs[ledger.alice_id[i]];
            pr.outcome = pr.state.bell_measurement(0, 1, rng);
            pr.measured = true;
            const int two = id_a->bits[2 * i] * 2 + id_a->bits[2 * i + 1];
            if (decode_bell_to_bits(pr.outcome) != two) ++mismatches;
        }
        out.auth_alice_mismatches = mismatches;
        if (!eve_is_bob) {  // an impersonating receiver cannot check id_A
            const bool accept =
                static_cast<double>(mismatches) / cfg.l <= cfg.auth_mismatch_tolerance;
            if (!accept) {
                out.transcript.add('B', "auth_alice_verdict", "reject");
                out.status = Status::AbortAuthAlice;
                return out;
            }
        }
        out.transcript.add('B', "auth_alice_verdict", "accept");
    }

    // Step 5: second round of the DI-security check, performed by Bob alone.
    out.transcript.add('A', "check2_positions", detail::join_ints(ledger.check2));
    {
        ChshAccumulator acc;
        for (int p : ledger.check2) {
            PairRecord& pr = ledger.pairs[p];
            const ChshSample s = chsh_sample_pair(pr.state, 0, 1, cfg.noise, rng);
            pr.measured = true;
            acc.add(s.j, s.k, s.a, s.b);
        }
        const ChshEstimate est = acc.estimate();
        out.s2 = est.s;
        out.s2_se = est.se;
        out.s2_valid = true;
        if (!chsh_threshold_check(est.s, cfg.epsilon2)) {
            out.transcript.add('B', "chsh2_verdict", "abort;s=" + detail::fmt_double(est.s));
            out.status = Status::AbortChsh2;
            return out;
        }
        out.transcript.add('B', "chsh2_verdict", "continue;s=" + detail::fmt_double(est.s));
    }

    // Step 6: message decoding and public check-bit verification.
    {
        out.decoded_mprime.reserve(2 * ledger.message.size());
        std::string leak_payload;
        for (int p : ledger.message) {
            PairRecord& pr = ledger.pairs[p];
            pr.outcome = pr.state.bell_measurement(0, 1, rng);
            pr.measured = true;
            const int two = decode_bell_to_bits(pr.outcome);
            out.decoded_mprime.push_back(static_cast<std::uint8_t>(two >> 1));
            out.decoded_mprime.push_back(static_cast<std::uint8_t>(two & 1));
            if (cfg.leak_message_outcomes) {
                if (!leak_payload.empty()) leak_payload += ',';
                leak_payload += to_string(pr.outcome);
            }
        }
        if (cfg.leak_message_outcomes)
            out.transcript.add('B', "message_outcomes", leak_payload);

        out.transcript.add('A', "check_positions", detail::join_ints(plan.positions));
        out.transcript.add('A', "check_values", bits_to_string(plan.values));
        Bits observed;
        for (int p : plan.positions) observed.push_back(out.decoded_mprime[p]);
        out.transcript.add('B', "check_values_observed", bits_to_string(observed));
        int errors = 0;
        for (std::size_t i = 0; i < observed.size(); ++i)
            if (observed[i] != plan.values[i]) ++errors;
        out.qber = plan.positions.empty() ? 0.0
                                          : static_cast<double>(errors) / plan.positions.size();
        if (out.qber > cfg.checkbit_error_tolerance) {
            out.transcript.add('B', "checkbit_verdict",
                               "abort;qber=" + detail::fmt_double(out.qber));
            out.status = Status::AbortCheckBits;
            return out;
        }
        out.transcript.add('B', "checkbit_verdict", "accept;qber=" + detail::fmt_double(out.qber));
        out.delivered_message = remove_check_bits(out.decoded_mprime, plan.positions);
        out.transcript.add('B', "delivered", "ok");
        out.status = Status::Delivered;
    }
    return out;
}

}  // namespace qsdc
