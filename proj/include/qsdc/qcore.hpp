#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "qsdc/errors.hpp"
#include "qsdc/rng.hpp"

namespace qsdc {

using cplx = std::complex<double>;
using Mat2 = std::array<cplx, 4>;    // row-major 2x2
using Mat4 = std::array<cplx, 16>;   // row-major 4x4

inline constexpr double kNormTol = 1e-9;
inline constexpr double kInvSqrt2 = 0.70710678118654752440;

// The four encoding unitaries {I, Z, X, iY}. Stored so that the enum value,
// read as bits (x<<1 | z), gives the Pauli's symplectic coordinates; the
// group product modulo global phase is then a plain XOR.
enum class PauliOp : int { I = 0, Z = 1, X = 2, iY = 3 };

// Bell basis outcomes, indexed to line up with pauli_to_bell.
enum class BellState : int { PhiPlus = 0, PhiMinus = 1, PsiPlus = 2, PsiMinus = 3 };

inline PauliOp compose_pauli(PauliOp a, PauliOp b) {
    return static_cast<PauliOp>(static_cast<int>(a) ^ static_cast<int>(b));
}

// Transpose, reduced modulo global phase: X and Z are symmetric, (iY)^T = -iY.
inline PauliOp transpose_class(PauliOp p) { return p; }

// (p ⊗ I)|Φ+> for each p: I→Φ+, Z→Φ-, X→Ψ+, iY→Ψ-.
inline BellState pauli_to_bell(PauliOp p) { return static_cast<BellState>(static_cast<int>(p)); }

inline PauliOp bell_to_pauli(BellState b) { return static_cast<PauliOp>(static_cast<int>(b)); }

inline const char* to_string(PauliOp p) {
    switch (p) {
        case PauliOp::I: return "I";
        case PauliOp::Z: return "Z";
        case PauliOp::X: return "X";
        case PauliOp::iY: return "iY";
    }
    return "?";
}

inline const char* to_string(BellState b) {
    switch (b) {
        case BellState::PhiPlus: return "Phi+";
        case BellState::PhiMinus: return "Phi-";
        case BellState::PsiPlus: return "Psi+";
        case BellState::PsiMinus: return "Psi-";
    }
    return "?";
}

inline Mat2 pauli_matrix(PauliOp p) {
    switch (p) {
        case PauliOp::I: return {cplx(1), cplx(0), cplx(0), cplx(1)};
        case PauliOp::Z: return {cplx(1), cplx(0), cplx(0), cplx(-1)};
        case PauliOp::X: return {cplx(0), cplx(1), cplx(1), cplx(0)};
        case PauliOp::iY: return {cplx(0), cplx(1), cplx(-1), cplx(0)};
    }
    return {};
}

// Measurement direction in the equatorial plane of the Bloch sphere; the
// eigenstates are (|0> ± e^{iθ}|1>)/√2, labeled +1 and -1.
struct EquatorialBasis {
    double angle = 0.0;
};

inline const Mat4 kCnot = {
    cplx(1), cplx(0), cplx(0), cplx(0),
    cplx(0), cplx(1), cplx(0), cplx(0),
    cplx(0), cplx(0), cplx(0), cplx(1),
    cplx(0), cplx(0), cplx(1), cplx(0),
};

// Normalized pure state over 1..4 qubits. Qubit k occupies bit k of the
// amplitude index (qubit 0 is the least significant bit).
class StateVector {
public:
    explicit StateVector(int num_qubits, std::size_t basis_state = 0)
        : nq_(num_qubits), amps_(std::size_t{1} << num_qubits) {
        if (num_qubits < 1 || num_qubits > 4)
            throw ConfigError("StateVector supports 1..4 qubits");
        if (basis_state >= amps_.size())
            throw ConfigError("basis state out of range");
        amps_[basis_state] = cplx(1.0);
    }

    // |Φ+> = (|00> + |11>)/√2 with Alice's qubit at index 0.
    static StateVector bell_pair() {
        StateVector s(2);
        s.amps_ = {cplx(kInvSqrt2), cplx(0), cplx(0), cplx(kInvSqrt2)};
        return s;
    }

    int num_qubits() const { return nq_; }
    std::size_t dim() const { return amps_.size(); }
    const std::vector<cplx>& amplitudes() const { return amps_; }
    cplx amplitude(std::size_t i) const { return amps_.at(i); }

    double norm_sq() const {
        double n = 0.0;
        for (const cplx& a : amps_) n += std::norm(a);
        return n;
    }

    void apply_single_qubit(int qubit, const Mat2& m) {
        check_qubit(qubit);
        const std::size_t mask = std::size_t{1} << qubit;
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if (i & mask) continue;
            const std::size_t j = i | mask;
            const cplx a0 = amps_[i], a1 = amps_[j];
            amps_[i] = m[0] * a0 + m[1] * a1;
            amps_[j] = m[2] * a0 + m[3] * a1;
        }
    }

    void apply_pauli(int qubit, PauliOp op) {
        if (op == PauliOp::I) {
            check_qubit(qubit);
            return;
        }
        apply_single_qubit(qubit, pauli_matrix(op));
    }

    // Applies a 4x4 unitary on the ordered pair (q1, q2); the row/column index
    // is 2*v1 + v2 for qubit values v1, v2.
    void apply_two_qubit(int q1, int q2, const Mat4& u) {
        check_qubit(q1);
        check_qubit(q2);
        if (q1 == q2) throw ConfigError("apply_two_qubit: qubits must differ");
        require_unitary(u);
        const std::size_t m1 = std::size_t{1} << q1;
        const std::size_t m2 = std::size_t{1} << q2;
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if ((i & m1) || (i & m2)) continue;
            std::array<std::size_t, 4> idx = {i, i | m2, i | m1, i | m1 | m2};
            std::array<cplx, 4> in;
            for (int k = 0; k < 4; ++k) in[k] = amps_[idx[k]];
            for (int r = 0; r < 4; ++r) {
                cplx acc(0);
                for (int c = 0; c < 4; ++c) acc += u[r * 4 + c] * in[c];
                amps_[idx[r]] = acc;
            }
        }
    }

    // Replaces the amplitudes wholesale; the new vector must match the register
    // dimension and be normalized within kNormTol.
    void overwrite_amplitudes(std::vector<cplx>&& amps) {
        if (amps.size() != amps_.size())
            throw ConfigError("overwrite_amplitudes: dimension mismatch");
        double n = 0.0;
        for (const cplx& a : amps) n += std::norm(a);
        if (std::abs(n - 1.0) > 1e-6)
            throw ConfigError("overwrite_amplitudes: state is not normalized");
        amps_ = std::move(amps);
        const double scale = 1.0 / std::sqrt(n);
        for (cplx& a : amps_) a *= scale;
    }

    // Extends the register with one qubit in |0>, appended as the new highest index.
    void append_qubit() {
        if (nq_ >= 4) throw ConfigError("append_qubit: register is full");
        amps_.resize(amps_.size() * 2, cplx(0));
        ++nq_;
    }

    // Projective measurement in the orthonormal basis {|u>, |v>} with
    // |u> = u0|0> + u1|1>. Returns +1 for |u>, -1 for |v>; the measured qubit
    // stays in the register, collapsed.
    int measure_in_basis(int qubit, cplx u0, cplx u1, Rng& rng) {
        check_qubit(qubit);
        const cplx v0 = -std::conj(u1), v1 = std::conj(u0);
        const std::size_t mask = std::size_t{1} << qubit;
        double p_u = 0.0;
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if (i & mask) continue;
            p_u += std::norm(std::conj(u0) * amps_[i] + std::conj(u1) * amps_[i | mask]);
        }
        const int outcome = (uniform01(rng) < p_u) ? +1 : -1;
        const cplx b0 = (outcome > 0) ? u0 : v0;
        const cplx b1 = (outcome > 0) ? u1 : v1;
        const double p = (outcome > 0) ? p_u : 1.0 - p_u;
        const double scale = 1.0 / std::sqrt(std::max(p, 1e-300));
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if (i & mask) continue;
            const std::size_t j = i | mask;
            const cplx proj = std::conj(b0) * amps_[i] + std::conj(b1) * amps_[j];
            amps_[i] = proj * b0 * scale;
            amps_[j] = proj * b1 * scale;
        }
        return outcome;
    }

    int measure_equatorial(int qubit, EquatorialBasis basis, Rng& rng) {
        const cplx phase = std::exp(cplx(0.0, basis.angle));
        return measure_in_basis(qubit, cplx(kInvSqrt2), phase * kInvSqrt2, rng);
    }

    // Returns the bit value 0/1.
    int measure_computational(int qubit, Rng& rng) {
        const int out = measure_in_basis(qubit, cplx(1), cplx(0), rng);
        return out > 0 ? 0 : 1;
    }

    // Joint projection of (q1, q2) onto the Bell basis; q1 plays the role of
    // the first qubit in |Φ±>, |Ψ±>.
    BellState bell_measurement(int q1, int q2, Rng& rng) {
        check_qubit(q1);
        check_qubit(q2);
        if (q1 == q2) throw ConfigError("bell_measurement: qubits must differ");
        const std::size_t m1 = std::size_t{1} << q1;
        const std::size_t m2 = std::size_t{1} << q2;

        // Bell amplitude per rest-configuration, indexed by BellState.
        auto bell_amp = [&](std::size_t base, int which) {
            const cplx a00 = amps_[base];
            const cplx a01 = amps_[base | m2];
            const cplx a10 = amps_[base | m1];
            const cplx a11 = amps_[base | m1 | m2];
            switch (which) {
                case 0: return (a00 + a11) * kInvSqrt2;
                case 1: return (a00 - a11) * kInvSqrt2;
                case 2: return (a01 + a10) * kInvSqrt2;
                default: return (a01 - a10) * kInvSqrt2;
            }
        };

        std::array<double, 4> probs = {0, 0, 0, 0};
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if ((i & m1) || (i & m2)) continue;
            for (int k = 0; k < 4; ++k) probs[k] += std::norm(bell_amp(i, k));
        }
        const double u = uniform01(rng);
        int outcome = 3;
        double cum = 0.0;
        for (int k = 0; k < 4; ++k) {
            cum += probs[k];
            if (u < cum) {
                outcome = k;
                break;
            }
        }
        // Collapse: |bell_k> on (q1,q2) tensored with the conditional rest state.
        const double scale = 1.0 / std::sqrt(std::max(probs[outcome], 1e-300));
        const double s1 = (outcome == 1 || outcome == 3) ? -1.0 : 1.0;
        const bool psi = outcome >= 2;
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if ((i & m1) || (i & m2)) continue;
            const cplx c = bell_amp(i, outcome) * scale;
            if (psi) {
                amps_[i] = cplx(0);
                amps_[i | m2] = c * kInvSqrt2;
                amps_[i | m1] = c * s1 * kInvSqrt2;
                amps_[i | m1 | m2] = cplx(0);
            } else {
                amps_[i] = c * kInvSqrt2;
                amps_[i | m2] = cplx(0);
                amps_[i | m1] = cplx(0);
                amps_[i | m1 | m2] = c * s1 * kInvSqrt2;
            }
        }
        return static_cast<BellState>(outcome);
    }

private:
    void check_qubit(int qubit) const {
        if (qubit < 0 || qubit >= nq_) throw ConfigError("qubit index out of range");
    }

    static void require_unitary(const Mat4& u) {
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) {
                cplx acc(0);
                for (int k = 0; k < 4; ++k) acc += u[r * 4 + k] * std::conj(u[c * 4 + k]);
                const cplx expect = (r == c) ? cplx(1) : cplx(0);
                if (std::abs(acc - expect) > kNormTol)
                    throw ConfigError("apply_two_qubit: matrix is not unitary");
            }
        }
    }

    int nq_;
    std::vector<cplx> amps_;
};

}  // namespace qsdc
