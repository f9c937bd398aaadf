#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mimo/gamp.hpp"
#include "mimo/quantizer.hpp"

using namespace mimo;

namespace {

GampConfig tight_config() {
    GampConfig cfg;
    cfg.max_iterations = 300;
    cfg.convergence_tol = 1e-14;
    return cfg;
}

}  // namespace

TEST_CASE("discrete denoiser equals explicit four-point posterior enumeration") {
    const Constellation qpsk = Constellation::qpsk();
    Rng rng(31);
    for (int trial = 0; trial < 2000; ++trial) {
        const cplx s{2.0 * rng.next_gaussian(), 2.0 * rng.next_gaussian()};
        const double v_s = 0.01 + 2.0 * rng.next_double();
        const auto [mean, var] = discrete_denoiser(s, v_s, qpsk);

        // Log-sum-exp shift keeps the enumeration well defined when the
        // observation sits far from every point.
        double max_logw = -1e300;
        double logw[4];
        for (std::size_t i = 0; i < qpsk.points().size(); ++i) {
            logw[i] = std::log(qpsk.probabilities()[i]) -
                      std::norm(s - qpsk.points()[i]) / v_s;
            max_logw = std::max(max_logw, logw[i]);
        }
        double z = 0.0;
        cplx m1{0.0, 0.0};
        double m2 = 0.0;
        for (std::size_t i = 0; i < qpsk.points().size(); ++i) {
            const cplx x = qpsk.points()[i];
            const double w = std::exp(logw[i] - max_logw);
            z += w;
            m1 += w * x;
            m2 += w * std::norm(x);
        }
        m1 /= z;
        m2 /= z;
        CHECK(std::abs(mean - m1) < 1e-12);
        CHECK(std::abs(var - (m2 - std::norm(m1))) < 1e-12);
    }
}

TEST_CASE("gaussian denoiser is the scalar wiener filter") {
    Rng rng(32);
    for (int trial = 0; trial < 1000; ++trial) {
        const cplx s{rng.next_gaussian(), rng.next_gaussian()};
        const double v_s = 0.01 + rng.next_double();
        const auto [mean, var] = gaussian_denoiser(s, v_s);
        const double shrink = 1.0 / (1.0 + v_s);
        CHECK(std::abs(mean - s * shrink) < 1e-14);
        CHECK(var == doctest::Approx(v_s * shrink).epsilon(1e-14));
    }
}

TEST_CASE("gamp with gaussian prior and unquantized outputs matches direct lmmse") {
    for (int trial = 0; trial < 100; ++trial) {
        const int K = 4 + trial % 13;  // K <= 16
        const int N = 6 * K;
        const double nv = 0.05 + 0.4 * ((trial * 7) % 10) / 10.0;
        const SystemConfig cfg(K, N, nv, Constellation::gaussian());
        const ChannelRealization ch = sample_channel(cfg, 1000 + trial);
        const VectorC x = sample_symbols(cfg.constellation, K, 2000 + trial);
        const VectorC y = received_signal(ch, x, nv, 3000 + trial);

        const AdcBank bank = AdcBank::uniform(N, AdcSpec::infinite());
        const OutputChannel output = OutputChannel::pdq_from_bank(bank, nv);
        const GampResult res =
            gamp_run(ch, y, output, InputDenoiser::gaussian(), tight_config());
        REQUIRE(res.converged);

        const VectorC direct = linear_mmse_direct(ch, y, nv);
        CHECK((res.estimate - direct).norm() / direct.norm() < 1e-6);
    }
}

TEST_CASE("one-bit dq estimates do not depend on the quantizer step") {
    const int K = 8, N = 32;
    const double nv = 0.3;
    const SystemConfig cfg(K, N, nv, Constellation::qpsk());
    const ChannelRealization ch = sample_channel(cfg, 5);
    const VectorC x = sample_symbols(cfg.constellation, K, 6);
    const VectorC y = received_signal(ch, x, nv, 7);

    GampResult runs[2];
    const double steps[2] = {0.5, 3.0};
    for (int i = 0; i < 2; ++i) {
        const AdcBank bank = AdcBank::uniform(N, AdcSpec::uniform(1, steps[i]));
        const VectorC r = quantize_vector(y, bank);
        runs[i] = gamp_run(ch, r, OutputChannel::dq(bank, nv),
                           InputDenoiser::discrete(cfg.constellation), GampConfig{});
    }
    // One-bit cells are the half-lines regardless of the step, so the two
    // runs see identical likelihoods and must agree bit for bit.
    CHECK(runs[0].estimate == runs[1].estimate);
    CHECK(runs[0].variance == runs[1].variance);
}

TEST_CASE("dq detection recovers qpsk symbols at high snr with fine quantization") {
    const int K = 8, N = 64;
    const double nv = SystemConfig::noise_variance_from_snr_db(15.0);
    const SystemConfig cfg(K, N, nv, Constellation::qpsk());
    const ChannelRealization ch = sample_channel(cfg, 11);
    const VectorC x = sample_symbols(cfg.constellation, K, 12);
    const VectorC y = received_signal(ch, x, nv, 13);
    const AdcBank bank = AdcBank::uniform(N, AdcSpec::uniform(4, 0.3));
    const VectorC r = quantize_vector(y, bank);

    const GampResult res = gamp_run(ch, r, OutputChannel::dq(bank, nv),
                                    InputDenoiser::discrete(cfg.constellation), GampConfig{});
    const VectorC decided = hard_decision(res.estimate, cfg.constellation);
    CHECK((decided - x).norm() == 0.0);
}

TEST_CASE("hard decision maps to the nearest constellation point") {
    const Constellation qpsk = Constellation::qpsk();
    const auto point = [&](double re_sign, double im_sign) {
        for (const cplx& p : qpsk.points()) {
            if (p.real() * re_sign > 0.0 && p.imag() * im_sign > 0.0) return p;
        }
        return cplx{0.0, 0.0};
    };
    CHECK(qpsk.hard_decision(cplx{0.9, 0.1}) == point(+1, +1));
    CHECK(qpsk.hard_decision(cplx{-0.2, -3.0}) == point(-1, -1));
    VectorC est(2);
    est << cplx{0.4, -0.3}, cplx{-1.0, 2.0};
    const VectorC dec = hard_decision(est, qpsk);
    CHECK(dec(0) == point(+1, -1));
    CHECK(dec(1) == point(-1, +1));
}
