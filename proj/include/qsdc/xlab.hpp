#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "qsdc/adversary.hpp"
#include "qsdc/chsh.hpp"
#include "qsdc/config_json.hpp"
#include "qsdc/errors.hpp"
#include "qsdc/noise.hpp"
#include "qsdc/protocol.hpp"
#include "qsdc/rng.hpp"
#include "qsdc/stats.hpp"

namespace qsdc {

enum class EmitFormat { Csv, Json };

inline EmitFormat parse_format(const std::string& s) {
    if (s == "csv") return EmitFormat::Csv;
    if (s == "json") return EmitFormat::Json;
    throw ConfigError("format must be csv or json");
}

// A seeded Monte Carlo campaign: `trials` independent protocol runs.
struct RunConfig {
    ProtocolConfig protocol;
    AttackStrategy attack;
    int trials = 100;
    int workers = 1;
    std::string output_path;
    EmitFormat format = EmitFormat::Csv;

    void validate() const {
        protocol.validate();
        if (trials < 1) throw ConfigError("trials must be >= 1");
        if (workers < 1) throw ConfigError("workers must be >= 1");
    }
};

inline std::string fmt(double v, int decimals = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

// Tabular result with provenance, serializable to CSV or JSON. Rows are
// pre-formatted strings so both formats are byte-deterministic.
struct Table {
    std::vector<std::pair<std::string, std::string>> provenance;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void prov(std::string key, std::string value) {
        provenance.emplace_back(std::move(key), std::move(value));
    }

    std::string to_csv() const {
        std::string out;
        for (const auto& [k, v] : provenance) out += "# " + k + "=" + v + "\n";
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (i) out += ',';
            out += columns[i];
        }
        out += '\n';
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) out += ',';
                out += row[i];
            }
            out += '\n';
        }
        return out;
    }

    std::string to_json_text() const {
        json prov_obj = json::object();
        for (const auto& [k, v] : provenance) prov_obj[k] = v;
        json rows_arr = json::array();
        for (const auto& row : rows) {
            json obj = json::object();
            for (std::size_t i = 0; i < columns.size() && i < row.size(); ++i)
                obj[columns[i]] = row[i];
            rows_arr.push_back(obj);
        }
        return json{{"provenance", prov_obj}, {"rows", rows_arr}}.dump(2) + "\n";
    }

    std::string render(EmitFormat f) const {
        return f == EmitFormat::Csv ? to_csv() : to_json_text();
    }

    void write(const std::string& path, EmitFormat f) const {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw EstimationError("cannot open output file: " + path);
        os << render(f);
        if (!os) throw EstimationError("write failed: " + path);
    }
};

inline std::string config_hash(const ProtocolConfig& proto, const AttackStrategy& attack) {
    const json j{{"protocol", proto}, {"attack", attack}};
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(j.dump())));
    return buf;
}

struct SEstimate {
    double s = 0.0, se = 0.0;
};

struct CampaignResult {
    int trials = 0;
    std::map<Status, int> status_counts;
    int delivered = 0;
    int exact_messages = 0;
    long correct_bits = 0, total_bits = 0;
    double mean_s1 = 0.0, mean_s2 = 0.0;
    double se_mean_s1 = 0.0, se_mean_s2 = 0.0;
    double mean_qber = 0.0;
    std::vector<SEstimate> s_log;  // every s estimate with its per-run SE

    double delivery_rate() const { return static_cast<double>(delivered) / trials; }
    double abort_rate() const { return 1.0 - delivery_rate(); }
    double bit_accuracy() const {
        return total_bits ? static_cast<double>(correct_bits) / total_bits : 0.0;
    }
};

namespace detail {

struct TrialOut {
    Status status = Status::Delivered;
    bool exact = false;
    long correct_bits = 0, total_bits = 0;
    double s1 = 0, s1_se = 0, s2 = 0, s2_se = 0;
    bool s1_valid = false, s2_valid = false;
    double qber = -1.0;
};

inline TrialOut one_trial(const ProtocolConfig& base, const AttackStrategy& attack,
                          std::uint64_t master_seed, int index) {
    ProtocolConfig cfg = base;
    cfg.seed = derive_seed(master_seed, static_cast<std::uint64_t>(index));
    Rng msg_rng = make_rng(splitmix64(cfg.seed ^ 0x6d657373ULL));
    const Bits message = random_bits(static_cast<std::size_t>(cfg.n), msg_rng);
    const ProtocolOutcome res = run_protocol(cfg, message, attack);

    TrialOut t;
    t.status = res.status;
    t.s1 = res.s1;
    t.s1_se = res.s1_se;
    t.s1_valid = res.s1_valid;
    t.s2 = res.s2;
    t.s2_se = res.s2_se;
    t.s2_valid = res.s2_valid;
    t.qber = res.qber;
    if (res.status == Status::Delivered && res.delivered_message) {
        t.exact = *res.delivered_message == message;
        t.total_bits = static_cast<long>(message.size());
        for (std::size_t i = 0; i < message.size(); ++i)
            if ((*res.delivered_message)[i] == message[i]) ++t.correct_bits;
    }
    return t;
}

}  // namespace detail

// Runs `trials` independent seeded protocol executions. Per-trial seeds fan
// out from the master seed, so results are identical for any worker count;
// aggregation walks trials in index order.
inline CampaignResult run_trials(const RunConfig& rc) {
    rc.validate();
    std::vector<detail::TrialOut> outs(rc.trials);
    const std::uint64_t master = rc.protocol.seed;

    auto work = [&](int begin, int stride) {
        for (int i = begin; i < rc.trials; i += stride)
            outs[i] = detail::one_trial(rc.protocol, rc.attack, master, i);
    };
    if (rc.workers == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < rc.workers; ++w) pool.emplace_back(work, w, rc.workers);
        for (auto& th : pool) th.join();
    }

    CampaignResult agg;
    agg.trials = rc.trials;
    double sum_s1 = 0, sum_s1_sq = 0, sum_s2 = 0, sum_s2_sq = 0, sum_qber = 0;
    long n_s1 = 0, n_s2 = 0, n_qber = 0;
    for (const auto& t : outs) {
        ++agg.status_counts[t.status];
        if (t.status == Status::Delivered) {
            ++agg.delivered;
            if (t.exact) ++agg.exact_messages;
        }
        agg.correct_bits += t.correct_bits;
        agg.total_bits += t.total_bits;
        if (t.s1_valid) {
            sum_s1 += t.s1;
            sum_s1_sq += t.s1 * t.s1;
            ++n_s1;
            agg.s_log.push_back({t.s1, t.s1_se});
        }
        if (t.s2_valid) {
            sum_s2 += t.s2;
            sum_s2_sq += t.s2 * t.s2;
            ++n_s2;
            agg.s_log.push_back({t.s2, t.s2_se});
        }
        if (t.qber >= 0.0) {
            sum_qber += t.qber;
            ++n_qber;
        }
    }
    if (n_s1) {
        agg.mean_s1 = sum_s1 / n_s1;
        const double var = std::max(sum_s1_sq / n_s1 - agg.mean_s1 * agg.mean_s1, 0.0);
        agg.se_mean_s1 = std::sqrt(var / n_s1);
    }
    if (n_s2) {
        agg.mean_s2 = sum_s2 / n_s2;
        const double var = std::max(sum_s2_sq / n_s2 - agg.mean_s2 * agg.mean_s2, 0.0);
        agg.se_mean_s2 = std::sqrt(var / n_s2);
    }
    if (n_qber) agg.mean_qber = sum_qber / n_qber;
    return agg;
}

inline Table campaign_table(const RunConfig& rc, const CampaignResult& r) {
    Table t;
    t.prov("config_hash", config_hash(rc.protocol, rc.attack));
    t.prov("seed", std::to_string(rc.protocol.seed));
    t.prov("attack", rc.attack.name());
    t.prov("p_gate", fmt(rc.protocol.noise.p_gate, 9));
    t.prov("eta", std::to_string(rc.protocol.noise.eta));
    t.columns = {"trials",    "delivered",  "delivery_rate", "exact_messages", "bit_accuracy",
                 "abort_chsh1", "abort_chsh2", "abort_auth_bob", "abort_auth_alice",
                 "abort_check_bits", "mean_s1", "se_mean_s1", "mean_s2", "se_mean_s2",
                 "mean_qber"};
    auto count = [&](Status s) {
        auto it = r.status_counts.find(s);
        return it == r.status_counts.end() ? 0 : it->second;
    };
    t.rows.push_back({std::to_string(r.trials), std::to_string(r.delivered),
                      fmt(r.delivery_rate()), std::to_string(r.exact_messages),
                      fmt(r.bit_accuracy()), std::to_string(count(Status::AbortChsh1)),
                      std::to_string(count(Status::AbortChsh2)),
                      std::to_string(count(Status::AbortAuthBob)),
                      std::to_string(count(Status::AbortAuthAlice)),
                      std::to_string(count(Status::AbortCheckBits)), fmt(r.mean_s1),
                      fmt(r.se_mean_s1), fmt(r.mean_s2), fmt(r.se_mean_s2),
                      fmt(r.mean_qber)});
    return t;
}

// Single-pair dense coding through the noisy channel, repeated `shots` times;
// counts over the four decoded symbols.
inline std::array<long, 4> histogram_message(int two_bit_message, const NoiseModel& noise,
                                             int shots, std::uint64_t seed) {
    if (shots < 1) throw ConfigError("shots must be >= 1");
    if (two_bit_message < 0 || two_bit_message > 3)
        throw ConfigError("message must be a two-bit value");
    noise.validate();
    std::array<long, 4> counts = {0, 0, 0, 0};
    Rng rng = make_rng(seed);
    for (int s = 0; s < shots; ++s) {
        StateVector pair = StateVector::bell_pair();
        pair.apply_pauli(0, encode_two_bits(two_bit_message));
        transmit(pair, 0, noise, rng);
        ++counts[decode_bell_to_bits(pair.bell_measurement(0, 1, rng))];
    }
    return counts;
}

inline Table histogram_table(int message, const NoiseModel& noise, int shots, std::uint64_t seed,
                             const std::array<long, 4>& counts) {
    Table t;
    t.prov("seed", std::to_string(seed));
    t.prov("p_gate", fmt(noise.p_gate, 9));
    t.prov("eta", std::to_string(noise.eta));
    t.prov("shots", std::to_string(shots));
    const char* labels[] = {"00", "01", "10", "11"};
    t.columns = {"message", "outcome", "count", "fraction"};
    for (int k = 0; k < 4; ++k)
        t.rows.push_back({labels[message], labels[k], std::to_string(counts[k]),
                          fmt(static_cast<double>(counts[k]) / shots)});
    return t;
}

struct SweepRow {
    int eta = 0;
    int trials = 0;
    double accuracy = 0.0;  // correctly decoded two-bit symbols
    double abort_rate = 0.0;
    double mean_s1 = 0.0, mean_s2 = 0.0;
    double wall_time_ms = 0.0;  // console diagnostics; kept out of emitted files
};

struct SweepResult {
    std::vector<SweepRow> rows;
};

// Per-eta accuracy of single-pair dense coding plus protocol-level abort and
// CHSH columns from a smaller batch of full runs.
inline SweepResult sweep_eta(int eta_min, int eta_max, int eta_step, NoiseModel noise,
                             int trials_per_point, const ProtocolConfig& proto_base,
                             int protocol_runs, std::uint64_t seed) {
    if (eta_step < 1) throw ConfigError("eta step must be >= 1");
    if (eta_min < 0 || eta_max < eta_min) throw ConfigError("bad eta range");
    if (trials_per_point < 1) throw ConfigError("trials must be >= 1");
    SweepResult res;
    for (int eta = eta_min; eta <= eta_max; eta += eta_step) {
        const auto t0 = std::chrono::steady_clock::now();
        SweepRow row;
        row.eta = eta;
        row.trials = trials_per_point;
        noise.eta = eta;

        Rng rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(eta)));
        long correct = 0;
        for (int s = 0; s < trials_per_point; ++s) {
            const int msg = static_cast<int>(uniform01(rng) * 4.0);
            StateVector pair = StateVector::bell_pair();
            pair.apply_pauli(0, encode_two_bits(msg));
            transmit(pair, 0, noise, rng);
            if (decode_bell_to_bits(pair.bell_measurement(0, 1, rng)) == msg) ++correct;
        }
        row.accuracy = static_cast<double>(correct) / trials_per_point;

        if (protocol_runs > 0) {
            RunConfig rc;
            rc.protocol = proto_base;
            rc.protocol.noise = noise;
            rc.protocol.seed = derive_seed(seed, 0x5eedULL + eta);
            rc.trials = protocol_runs;
            const CampaignResult cr = run_trials(rc);
            row.abort_rate = cr.abort_rate();
            row.mean_s1 = cr.mean_s1;
            row.mean_s2 = cr.mean_s2;
        }
        row.wall_time_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - t0)
                               .count();
        res.rows.push_back(row);
    }
    return res;
}

inline Table sweep_table(const SweepResult& res, const NoiseModel& noise, std::uint64_t seed) {
    Table t;
    t.prov("seed", std::to_string(seed));
    t.prov("p_gate", fmt(noise.p_gate, 9));
    t.prov("gate_time_ns", fmt(noise.gate_time_ns, 1));
    t.columns = {"eta", "channel_time_us", "trials", "accuracy", "abort_rate", "mean_s1",
                 "mean_s2"};
    for (const auto& r : res.rows)
        t.rows.push_back({std::to_string(r.eta), fmt(r.eta * noise.gate_time_ns * 1e-3, 3),
                          std::to_string(r.trials), fmt(r.accuracy), fmt(r.abort_rate),
                          fmt(r.mean_s1), fmt(r.mean_s2)});
    return t;
}

struct CalibrationResult {
    double p_gate = 0.0;
    std::vector<double> residuals;  // achieved - target per anchor
    bool degenerate = false;
};

// Deterministic simulated accuracy of two-bit decoding at (p_gate, eta);
// common random numbers across p values keep the objective smooth.
inline double simulated_symbol_accuracy(double p_gate, int eta, int shots, std::uint64_t seed) {
    NoiseModel m;
    m.p_gate = p_gate;
    m.eta = eta;
    const std::array<long, 4> counts = histogram_message(0, m, shots, seed);
    // Symbol survives iff the accumulated Pauli error is the identity class,
    // independent of which symbol was sent; "00" stands in for all four.
    return static_cast<double>(counts[0]) / shots;
}

// Fits p_gate under the symmetric depolarizing mix by scalar search
// minimizing the squared error against the (eta, target_accuracy) anchors,
// using the simulator itself as the forward model.
inline CalibrationResult calibrate_noise(const std::vector<std::pair<int, double>>& anchors,
                                         int shots = 20000, std::uint64_t seed = 20240901,
                                         double p_lo = 1e-6, double p_hi = 2e-2) {
    if (anchors.empty()) throw ConfigError("calibrate_noise needs at least one anchor");
    for (const auto& [eta, target] : anchors) {
        if (eta < 0) throw ConfigError("anchor eta must be >= 0");
        if (target < 0.0 || target > 1.0) throw ConfigError("anchor accuracy must be in [0,1]");
    }
    CalibrationResult result;
    if (std::all_of(anchors.begin(), anchors.end(),
                    [](const auto& a) { return a.first == 0; })) {
        // Accuracy at eta=0 is independent of p_gate; nothing to fit.
        result.degenerate = true;
        result.p_gate = p_lo;
        for (const auto& a : anchors) result.residuals.push_back(1.0 - a.second);
        return result;
    }

    auto sse = [&](double p) {
        double acc = 0.0;
        int k = 0;
        for (const auto& [eta, target] : anchors) {
            const double a = simulated_symbol_accuracy(p, eta, shots, derive_seed(seed, k++));
            const double r = a - target;
            acc += r * r;
        }
        return acc;
    };

    // Coarse scan on a log grid, then golden-section refinement.
    const int grid = 41;
    double best_p = p_lo, best_v = 1e300;
    int best_i = 0;
    std::vector<double> ps(grid);
    for (int i = 0; i < grid; ++i) {
        const double f = static_cast<double>(i) / (grid - 1);
        ps[i] = p_lo * std::pow(p_hi / p_lo, f);
        const double v = sse(ps[i]);
        if (v < best_v) {
            best_v = v;
            best_p = ps[i];
            best_i = i;
        }
    }
    if (best_i == grid - 1)
        throw EstimationError("calibration did not converge inside the search bounds");
    if (best_i == 0) {
        result.degenerate = true;  // unconstrained below the solver floor
    } else {
        double lo = ps[best_i - 1], hi = ps[best_i + 1];
        const double gr = 0.61803398874989485;
        double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
        double f1 = sse(x1), f2 = sse(x2);
        for (int it = 0; it < 48; ++it) {
            if (f1 < f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - gr * (hi - lo);
                f1 = sse(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + gr * (hi - lo);
                f2 = sse(x2);
            }
        }
        best_p = 0.5 * (lo + hi);
    }
    result.p_gate = best_p;
    int k = 0;
    for (const auto& [eta, target] : anchors)
        result.residuals.push_back(
            simulated_symbol_accuracy(best_p, eta, shots, derive_seed(seed, k++)) - target);
    return result;
}

struct DetectionRow {
    int l = 0;
    std::string role;  // which party Eve impersonates
    int trials = 0;
    double empirical = 0.0;
    double analytic = 0.0;  // 1 - (1/4)^l
    double se = 0.0;
};

// Impersonation campaigns for each l: empirical abort frequency at the
// authentication step against the 1-(1/4)^l detection law.
inline std::vector<DetectionRow> detection_curve(const std::vector<int>& l_values, int trials,
                                                 std::uint64_t seed, int d = 512) {
    if (trials < 100) throw ConfigError("detection_curve needs >= 100 trials per l");
    std::vector<DetectionRow> rows;
    for (int l : l_values) {
        if (l < 1) throw ConfigError("l must be >= 1");
        for (const bool as_alice : {true, false}) {
            ProtocolConfig cfg;
            cfg.n = 8;
            cfg.c = 8;
            cfg.l = l;
            cfg.d = d;
            cfg.epsilon1 = cfg.epsilon2 = 0.8;
            cfg.auth_mismatch_tolerance = 0.0;
            cfg.seed = derive_seed(seed, (static_cast<std::uint64_t>(l) << 1) | as_alice);
            RunConfig rc;
            rc.protocol = cfg;
            rc.attack = as_alice ? AttackStrategy::impersonate_alice()
                                 : AttackStrategy::impersonate_bob();
            rc.trials = trials;
            const CampaignResult cr = run_trials(rc);
            const Status detect_status = as_alice ? Status::AbortAuthAlice : Status::AbortAuthBob;
            const auto it = cr.status_counts.find(detect_status);
            const int detected = it == cr.status_counts.end() ? 0 : it->second;
            DetectionRow row;
            row.l = l;
            row.role = as_alice ? "alice" : "bob";
            row.trials = trials;
            row.empirical = static_cast<double>(detected) / trials;
            row.analytic = 1.0 - std::pow(0.25, l);
            row.se = stats::binomial_se(row.analytic, trials);
            rows.push_back(row);
        }
    }
    return rows;
}

inline Table detection_table(const std::vector<DetectionRow>& rows, std::uint64_t seed) {
    Table t;
    t.prov("seed", std::to_string(seed));
    t.columns = {"l", "impersonated_role", "trials", "empirical_detection",
                 "analytic_detection", "binomial_se"};
    for (const auto& r : rows)
        t.rows.push_back({std::to_string(r.l), r.role, std::to_string(r.trials),
                          fmt(r.empirical), fmt(r.analytic), fmt(r.se, 8)});
    return t;
}

struct ChshReport {
    double s = 0.0;
    double se = 0.0;
    long samples = 0;
    bool pass = false;  // against the 2√2 - epsilon threshold
};

// Standalone CHSH estimation outside a full protocol run: prepare, attack,
// transmit, measure, for fast attack triage.
inline ChshReport chsh_report(int d, const NoiseModel& noise, const AttackStrategy& attack,
                              std::uint64_t seed, double epsilon = 0.6) {
    if (d < 100) throw ConfigError("chsh_report needs d >= 100");
    noise.validate();
    Rng rng = make_rng(seed);
    EveRecord eve;
    ChshAccumulator acc;
    for (int i = 0; i < d; ++i) {
        StateVector pair = StateVector::bell_pair();
        apply_channel_attack(pair, 0, attack, eve, rng);
        transmit(pair, 0, noise, rng);
        const ChshSample s = chsh_sample_pair(pair, 0, 1, noise, rng);
        acc.add(s.j, s.k, s.a, s.b);
    }
    const ChshEstimate est = acc.estimate();
    ChshReport rep;
    rep.s = est.s;
    rep.se = est.se;
    rep.samples = d;
    rep.pass = chsh_threshold_check(est.s, epsilon);
    return rep;
}

inline Table chsh_table(const ChshReport& rep, const AttackStrategy& attack,
                        const NoiseModel& noise, std::uint64_t seed) {
    Table t;
    t.prov("seed", std::to_string(seed));
    t.prov("attack", attack.name());
    t.prov("p_gate", fmt(noise.p_gate, 9));
    t.prov("eta", std::to_string(noise.eta));
    t.columns = {"samples", "s", "se", "verdict"};
    t.rows.push_back({std::to_string(rep.samples), fmt(rep.s), fmt(rep.se, 8),
                      rep.pass ? "pass" : "fail"});
    return t;
}

}  // namespace qsdc
