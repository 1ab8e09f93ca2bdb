#include <cmath>

#include <doctest.h>

#include "qsdc/noise.hpp"
#include "qsdc/qcore.hpp"
#include "qsdc/rng.hpp"

using namespace qsdc;

TEST_CASE("noiseless channel leaves the state untouched") {
    Rng rng = make_rng(1);
    for (const auto& [p, eta] : {std::pair{0.0, 100}, std::pair{0.3, 0}}) {
        NoiseModel m;
        m.p_gate = p;
        m.eta = eta;
        StateVector s = StateVector::bell_pair();
        transmit(s, 0, m, rng);
        CHECK(std::abs(s.amplitude(0) - cplx(kInvSqrt2)) < 1e-12);
        CHECK(std::abs(s.amplitude(3) - cplx(kInvSqrt2)) < 1e-12);
    }
}

TEST_CASE("error-free probability is (1-p)^eta") {
    NoiseModel m;
    m.p_gate = 2.41e-4;
    m.eta = 700;
    CHECK(error_free_probability(m) == doctest::Approx(0.8446).epsilon(5e-4));
    m.eta = 10;
    CHECK(error_free_probability(m) == doctest::Approx(0.99759).epsilon(1e-5));
    m.eta = 0;
    CHECK(error_free_probability(m) == 1.0);
}

TEST_CASE("deterministic X error maps |Phi+> to |Psi+>") {
    NoiseModel m;
    m.p_gate = 1.0;
    m.error_mix = {1.0, 0.0, 0.0};
    m.eta = 1;
    Rng rng = make_rng(2);
    StateVector s = StateVector::bell_pair();
    transmit(s, 0, m, rng);
    CHECK(std::abs(s.amplitude(1) - cplx(kInvSqrt2)) < 1e-12);
    CHECK(std::abs(s.amplitude(2) - cplx(kInvSqrt2)) < 1e-12);
    CHECK(s.bell_measurement(0, 1, rng) == BellState::PsiPlus);
}

TEST_CASE("readout flips") {
    Rng rng = make_rng(3);
    NoiseModel m;
    m.p_readout = 0.0;
    CHECK(noisy_readout(+1, m, rng) == +1);
    m.p_readout = 1.0;
    CHECK(noisy_readout(+1, m, rng) == -1);
    CHECK(noisy_readout(-1, m, rng) == +1);
    m.p_readout = 0.5;
    int flips = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i)
        if (noisy_readout(+1, m, rng) < 0) ++flips;
    CHECK(std::abs(flips / static_cast<double>(n) - 0.5) < 0.02);
}

TEST_CASE("transmit preserves the norm for arbitrary parameters") {
    Rng rng = make_rng(4);
    NoiseModel m;
    m.p_gate = 0.2;
    m.eta = 50;
    for (int i = 0; i < 100; ++i) {
        StateVector s = StateVector::bell_pair();
        transmit(s, 0, m, rng);
        transmit(s, 1, m, rng);
        CHECK(std::abs(s.norm_sq() - 1.0) < 1e-9);
    }
}

TEST_CASE("zero-error fraction under a Bell-measurement witness") {
    // The fraction of transmissions whose Bell outcome equals the no-noise
    // prediction is at least (1-p)^eta (error products can also cancel).
    Rng rng = make_rng(5);
    NoiseModel m;
    m.p_gate = 5e-3;
    m.eta = 40;
    const int n = 4000;
    int intact = 0;
    for (int i = 0; i < n; ++i) {
        StateVector s = StateVector::bell_pair();
        transmit(s, 0, m, rng);
        if (s.bell_measurement(0, 1, rng) == BellState::PhiPlus) ++intact;
    }
    const double fraction = intact / static_cast<double>(n);
    CHECK(fraction >= error_free_probability(m) - 4.0 / std::sqrt(n));
}

TEST_CASE("noise model validation") {
    NoiseModel m;
    m.p_gate = 1.5;
    CHECK_THROWS_AS(m.validate(), ConfigError);
    m = NoiseModel{};
    m.error_mix = {0.5, 0.5, 0.5};
    CHECK_THROWS_AS(m.validate(), ConfigError);
    m = NoiseModel{};
    m.eta = -1;
    CHECK_THROWS_AS(m.validate(), ConfigError);
    CHECK_NOTHROW(NoiseModel{}.validate());
}
