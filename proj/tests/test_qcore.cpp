#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "qsdc/qcore.hpp"
#include "qsdc/rng.hpp"

using namespace qsdc;

namespace {

// Independent oracle: applies a 2x2 matrix to one tensor factor by explicit
// summation over basis labels, without going through StateVector.
std::vector<cplx> oracle_apply_1q(const std::vector<cplx>& in, int nq, int qubit, const Mat2& m) {
    std::vector<cplx> out(in.size(), cplx(0));
    for (std::size_t i = 0; i < in.size(); ++i) {
        const int v = (i >> qubit) & 1;
        for (int vp = 0; vp < 2; ++vp) {
            const std::size_t j = (i & ~(std::size_t{1} << qubit)) |
                                  (static_cast<std::size_t>(vp) << qubit);
            out[j] += m[vp * 2 + v] * in[i];
        }
    }
    (void)nq;
    return out;
}

std::vector<cplx> bell_amps(BellState b) {
    const double r = kInvSqrt2;
    switch (b) {
        case BellState::PhiPlus: return {r, 0, 0, r};
        case BellState::PhiMinus: return {r, 0, 0, -r};
        case BellState::PsiPlus: return {0, r, r, 0};   // qubit0 is the low bit
        case BellState::PsiMinus: return {0, r, -r, 0};
    }
    return {};
}

// |<a|b>| for phase-insensitive comparison.
double overlap(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    cplx acc(0);
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return std::abs(acc);
}

constexpr std::array<PauliOp, 4> kAllPaulis = {PauliOp::I, PauliOp::Z, PauliOp::X, PauliOp::iY};

}  // namespace

TEST_CASE("bell pair has the |Phi+> amplitudes") {
    const StateVector s = StateVector::bell_pair();
    CHECK(s.amplitude(0).real() == doctest::Approx(0.7071).epsilon(1e-3));
    CHECK(std::abs(s.amplitude(1)) == doctest::Approx(0.0));
    CHECK(std::abs(s.amplitude(2)) == doctest::Approx(0.0));
    CHECK(s.amplitude(3).real() == doctest::Approx(0.7071).epsilon(1e-3));
    CHECK(s.norm_sq() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("computational measurements on |Phi+> are perfectly correlated") {
    Rng rng = make_rng(7);
    for (int i = 0; i < 200; ++i) {
        StateVector s = StateVector::bell_pair();
        const int a = s.measure_computational(0, rng);
        const int b = s.measure_computational(1, rng);
        CHECK(a == b);
    }
}

TEST_CASE("bell measurement of |Phi+> is PhiPlus with probability 1") {
    Rng rng = make_rng(11);
    for (int i = 0; i < 100; ++i) {
        StateVector s = StateVector::bell_pair();
        CHECK(s.bell_measurement(0, 1, rng) == BellState::PhiPlus);
    }
}

TEST_CASE("apply_pauli matches the tensor-factor oracle on |Phi+>") {
    for (PauliOp p : kAllPaulis) {
        StateVector s = StateVector::bell_pair();
        const std::vector<cplx> expect =
            oracle_apply_1q(StateVector::bell_pair().amplitudes(), 2, 0, pauli_matrix(p));
        s.apply_pauli(0, p);
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(std::abs(s.amplitude(i) - expect[i]) < 1e-12);
    }
    // The named cases: X maps Phi+ to Psi+, Z maps it to Phi-.
    StateVector sx = StateVector::bell_pair();
    sx.apply_pauli(0, PauliOp::X);
    CHECK(overlap(sx.amplitudes(), bell_amps(BellState::PsiPlus)) == doctest::Approx(1.0));
    StateVector sz = StateVector::bell_pair();
    sz.apply_pauli(0, PauliOp::Z);
    CHECK(overlap(sz.amplitudes(), bell_amps(BellState::PhiMinus)) == doctest::Approx(1.0));
}

TEST_CASE("apply_pauli rejects an out-of-range qubit") {
    StateVector s = StateVector::bell_pair();
    CHECK_THROWS_AS(s.apply_pauli(2, PauliOp::X), ConfigError);
}

TEST_CASE("two-qubit unitaries") {
    SUBCASE("controlled-NOT leaves |00> alone") {
        StateVector s(2, 0);
        s.apply_two_qubit(0, 1, kCnot);
        CHECK(std::abs(s.amplitude(0) - cplx(1)) < 1e-12);
    }
    SUBCASE("controlled-NOT from qubit 0 builds a GHZ state from |Phi+> x |0>") {
        StateVector s = StateVector::bell_pair();
        s.append_qubit();
        s.apply_two_qubit(0, 2, kCnot);
        CHECK(std::abs(s.amplitude(0) - cplx(kInvSqrt2)) < 1e-12);
        CHECK(std::abs(s.amplitude(7) - cplx(kInvSqrt2)) < 1e-12);
        for (std::size_t i : {1, 2, 3, 4, 5, 6}) CHECK(std::abs(s.amplitude(i)) < 1e-12);
    }
    SUBCASE("identity leaves the state unchanged") {
        Mat4 id{};
        for (int i = 0; i < 4; ++i) id[i * 4 + i] = cplx(1);
        StateVector s = StateVector::bell_pair();
        s.apply_two_qubit(0, 1, id);
        CHECK(overlap(s.amplitudes(), StateVector::bell_pair().amplitudes()) ==
              doctest::Approx(1.0));
    }
    SUBCASE("non-unitary matrices are rejected") {
        Mat4 bad{};
        bad[0] = cplx(2);
        StateVector s = StateVector::bell_pair();
        CHECK_THROWS_AS(s.apply_two_qubit(0, 1, bad), ConfigError);
    }
    SUBCASE("equal qubit indices are rejected") {
        Mat4 id{};
        for (int i = 0; i < 4; ++i) id[i * 4 + i] = cplx(1);
        StateVector s = StateVector::bell_pair();
        CHECK_THROWS_AS(s.apply_two_qubit(1, 1, id), ConfigError);
    }
}

TEST_CASE("equatorial measurement probabilities") {
    SUBCASE("either outcome is equally likely on a Bell pair") {
        Rng rng = make_rng(3);
        int plus = 0;
        const int n = 4000;
        for (int i = 0; i < n; ++i) {
            StateVector s = StateVector::bell_pair();
            if (s.measure_equatorial(0, {0.9}, rng) > 0) ++plus;
        }
        CHECK(std::abs(plus / static_cast<double>(n) - 0.5) < 4.0 / std::sqrt(n));
    }
    SUBCASE("an eigenstate gives +1 deterministically") {
        Rng rng = make_rng(5);
        const double th = std::numbers::pi / 4;
        for (int i = 0; i < 100; ++i) {
            StateVector s(1, 0);
            // (|0> + e^{i pi/4}|1>)/sqrt(2)
            std::vector<cplx> amps = {cplx(kInvSqrt2), std::exp(cplx(0, th)) * kInvSqrt2};
            s.overwrite_amplitudes(std::move(amps));
            CHECK(s.measure_equatorial(0, {th}, rng) == 1);
        }
    }
}

TEST_CASE("joint equatorial correlation on |Phi+> follows cos(a+b)") {
    Rng rng = make_rng(17);
    const int n = 4000;
    for (int trial = 0; trial < 5; ++trial) {
        const double ta = 2.0 * std::numbers::pi * uniform01(rng);
        const double tb = 2.0 * std::numbers::pi * uniform01(rng);
        long sum = 0;
        for (int i = 0; i < n; ++i) {
            StateVector s = StateVector::bell_pair();
            const int a = s.measure_equatorial(0, {ta}, rng);
            const int b = s.measure_equatorial(1, {tb}, rng);
            sum += a * b;
        }
        const double est = sum / static_cast<double>(n);
        CHECK(std::abs(est - std::cos(ta + tb)) < 4.0 / std::sqrt(n));
    }
}

TEST_CASE("pauli_to_bell agrees with direct amplitude expansion for all four ops") {
    for (PauliOp p : kAllPaulis) {
        const std::vector<cplx> expanded =
            oracle_apply_1q(StateVector::bell_pair().amplitudes(), 2, 0, pauli_matrix(p));
        CHECK(overlap(expanded, bell_amps(pauli_to_bell(p))) == doctest::Approx(1.0));
        CHECK(bell_to_pauli(pauli_to_bell(p)) == p);
    }
    CHECK(pauli_to_bell(PauliOp::I) == BellState::PhiPlus);
    CHECK(pauli_to_bell(PauliOp::iY) == BellState::PsiMinus);
}

TEST_CASE("pauli composition table") {
    CHECK(compose_pauli(PauliOp::X, PauliOp::Z) == PauliOp::iY);
    for (PauliOp p : kAllPaulis) {
        CHECK(compose_pauli(p, PauliOp::I) == p);
        CHECK(compose_pauli(p, p) == PauliOp::I);
    }
    // Verify against matrix products modulo global phase.
    for (PauliOp p : kAllPaulis) {
        for (PauliOp q : kAllPaulis) {
            const Mat2 mp = pauli_matrix(p), mq = pauli_matrix(q);
            Mat2 prod{};
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c)
                    for (int k = 0; k < 2; ++k) prod[r * 2 + c] += mp[r * 2 + k] * mq[k * 2 + c];
            const Mat2 mr = pauli_matrix(compose_pauli(p, q));
            // prod == phase * mr for a unit-modulus phase
            cplx phase(0);
            for (int i = 0; i < 4; ++i)
                if (std::abs(mr[i]) > 0.5) phase = prod[i] / mr[i];
            CHECK(std::abs(std::abs(phase) - 1.0) < 1e-12);
            for (int i = 0; i < 4; ++i) CHECK(std::abs(prod[i] - phase * mr[i]) < 1e-12);
        }
    }
}

TEST_CASE("dense-coding identity: encode then Bell-measure is deterministic") {
    Rng rng = make_rng(23);
    for (PauliOp p : kAllPaulis) {
        for (int rep = 0; rep < 32; ++rep) {
            StateVector s = StateVector::bell_pair();
            s.apply_pauli(0, p);
            CHECK(s.bell_measurement(0, 1, rng) == pauli_to_bell(p));
        }
    }
}

TEST_CASE("transpose rule over all 16 Pauli pairs") {
    Rng rng = make_rng(29);
    for (PauliOp p : kAllPaulis) {
        for (PauliOp q : kAllPaulis) {
            // Oracle expansion of (P x Q)|Phi+>.
            std::vector<cplx> amps = StateVector::bell_pair().amplitudes();
            amps = oracle_apply_1q(amps, 2, 0, pauli_matrix(p));
            amps = oracle_apply_1q(amps, 2, 1, pauli_matrix(q));
            const BellState expect = pauli_to_bell(compose_pauli(p, transpose_class(q)));
            CHECK(overlap(amps, bell_amps(expect)) == doctest::Approx(1.0));
            // And the sampled measurement agrees.
            StateVector s = StateVector::bell_pair();
            s.apply_pauli(0, p);
            s.apply_pauli(1, q);
            CHECK(s.bell_measurement(0, 1, rng) == expect);
        }
    }
}

TEST_CASE("norm is preserved across random operation sequences") {
    Rng rng = make_rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        StateVector s = StateVector::bell_pair();
        s.append_qubit();
        for (int step = 0; step < 20; ++step) {
            const int which = static_cast<int>(uniform01(rng) * 3.0);
            const int q = static_cast<int>(uniform01(rng) * 3.0);
            if (which == 0) {
                s.apply_pauli(q, static_cast<PauliOp>(static_cast<int>(uniform01(rng) * 4.0)));
            } else if (which == 1) {
                s.measure_equatorial(q, {2.0 * std::numbers::pi * uniform01(rng)}, rng);
            } else {
                const int q2 = (q + 1) % 3;
                s.apply_two_qubit(q, q2, kCnot);
            }
            CHECK(std::abs(s.norm_sq() - 1.0) < 1e-9);
        }
    }
}
