#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include "qsdc/errors.hpp"
#include "qsdc/noise.hpp"
#include "qsdc/qcore.hpp"
#include "qsdc/rng.hpp"

namespace qsdc {

// Published basis angles: A0=π/4, A1=0, A2=π/2 on the sender side and
// B1=π/4, B2=-π/4 on the receiver side. Under the equatorial correlation law
// <ab> = cos(θa+θb) the literal receiver angles would cancel the CHSH sum, so
// the receiver measures at the negated angle internally; announced labels are
// unchanged. A0 never enters the CHSH polynomial and serves marginal checks.
inline constexpr std::array<double, 3> kAliceAngles = {std::numbers::pi / 4, 0.0,
                                                       std::numbers::pi / 2};
inline constexpr std::array<double, 2> kBobAngles = {std::numbers::pi / 4, -std::numbers::pi / 4};

inline constexpr double kTsirelson = 2.0 * std::numbers::sqrt2;

inline EquatorialBasis alice_basis(int j) { return {kAliceAngles.at(j)}; }
inline EquatorialBasis bob_basis_effective(int k) { return {-kBobAngles.at(k - 1)}; }

struct ChshEstimate {
    double s = 0.0;
    double se = 0.0;                         // standard error of s
    std::array<double, 4> corr = {};         // E11, E12, E21, E22
    std::array<double, 3> alice_marginal = {};  // <a0>, <a1>, <a2>
    std::array<double, 2> bob_marginal = {};    // <b1>, <b2>
};

// Tallies (basis pair, outcome pair) counts and produces the CHSH polynomial
// S = E11 + E12 + E21 - E22 with E_jk = Pr(a=b|jk) - Pr(a!=b|jk).
class ChshAccumulator {
public:
    // j in {0,1,2}, k in {1,2}, outcomes ±1.
    void add(int j, int k, int a, int b) {
        if (j < 0 || j > 2 || k < 1 || k > 2) throw ConfigError("chsh: bad basis index");
        a_sum_[j] += a;
        a_n_[j] += 1;
        b_sum_[k - 1] += b;
        b_n_[k - 1] += 1;
        if (j == 0) return;  // A0 rounds feed the marginals only
        const int cell = (j - 1) * 2 + (k - 1);
        if (a == b)
            ++eq_[cell];
        else
            ++neq_[cell];
    }

    long samples(int cell) const { return eq_[cell] + neq_[cell]; }

    ChshEstimate estimate() const {
        ChshEstimate est;
        double var = 0.0;
        for (int cell = 0; cell < 4; ++cell) {
            const long n = samples(cell);
            if (n == 0)
                throw EstimationError(
                    "CHSH estimation failed: an empty correlation cell; increase d");
            const double e = static_cast<double>(eq_[cell] - neq_[cell]) / n;
            est.corr[cell] = e;
            var += (1.0 - e * e) / n;
        }
        est.s = est.corr[0] + est.corr[1] + est.corr[2] - est.corr[3];
        est.se = std::sqrt(var);
        for (int j = 0; j < 3; ++j)
            est.alice_marginal[j] = a_n_[j] ? static_cast<double>(a_sum_[j]) / a_n_[j] : 0.0;
        for (int k = 0; k < 2; ++k)
            est.bob_marginal[k] = b_n_[k] ? static_cast<double>(b_sum_[k]) / b_n_[k] : 0.0;
        return est;
    }

private:
    std::array<long, 4> eq_ = {}, neq_ = {};
    std::array<long, 3> a_sum_ = {}, a_n_ = {};
    std::array<long, 2> b_sum_ = {}, b_n_ = {};
};

// Pass iff s > 2 and s >= 2√2 - epsilon.
inline bool chsh_threshold_check(double s, double epsilon) {
    return s > 2.0 && s >= kTsirelson - epsilon;
}

// One CHSH trial on a shared pair: the first qubit measured in an A basis,
// the second in a B basis, both through the readout channel.
struct ChshSample {
    int j, k, a, b;
};

inline ChshSample chsh_sample_pair(StateVector& pair, int qa, int qb, const NoiseModel& readout,
                                   Rng& rng) {
    const int j = static_cast<int>(uniform01(rng) * 3.0);
    const int k = 1 + static_cast<int>(uniform01(rng) * 2.0);
    int a = pair.measure_equatorial(qa, alice_basis(j), rng);
    int b = pair.measure_equatorial(qb, bob_basis_effective(k), rng);
    a = noisy_readout(a, readout, rng);
    b = noisy_readout(b, readout, rng);
    return {j, k, a, b};
}

}  // namespace qsdc
