#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mimo/rng.hpp"
#include "mimo/state_evolution.hpp"
#include "mimo/tuning.hpp"

using namespace mimo;

namespace {

// Moments of a matched scalar posterior with correlation q: v_xhat = v_xxhat
// = q, c_xhat = v_x = 1.
SeMoments matched_moments(double q) {
    SeMoments m;
    m.v_x = 1.0;
    m.c_xhat = 1.0;
    m.v_xhat = q;
    m.v_xxhat = q;
    m.posterior_var = 1.0 - q;
    m.mismatch_gap = 1.0 - q;
    return m;
}

MixedProfile single(const AdcSpec& spec, double lambda) {
    MixedProfile p;
    p.entries.push_back({spec, lambda});
    return p;
}

}  // namespace

TEST_CASE("quadrature rule integrates normal moments exactly") {
    for (const int n : {5, 40, 200, 600}) {
        const GaussHermiteRule& rule = cached_gauss_hermite(n);
        double w = 0.0, m2 = 0.0, m4 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double u = rule.nodes[i];
            w += rule.weights[i];
            m2 += rule.weights[i] * u * u;
            m4 += rule.weights[i] * u * u * u * u;
        }
        CHECK(w == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(m2 == doctest::Approx(1.0).epsilon(1e-12));
        if (n >= 5) CHECK(m4 == doctest::Approx(3.0).epsilon(1e-11));
    }
}

TEST_CASE("psi is a probability distribution over the output alphabet") {
    Rng rng(77);
    for (int trial = 0; trial < 500; ++trial) {
        const int bits = 1 + trial % 4;
        const AdcSpec spec = AdcSpec::uniform(bits, 0.2 + rng.next_double());
        const double nv = std::exp(2.0 * (rng.next_double() - 0.5));
        const double vartheta = 6.0 * (rng.next_double() - 0.5);
        const SeMoments m = matched_moments(rng.next_double());
        double total = 0.0, total_deriv = 0.0;
        for (const double level : spec.levels()) {
            total += psi_eval(level, vartheta, spec, nv, m);
            total_deriv += psi_deriv(level, vartheta, spec, nv, m);
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(std::abs(total_deriv) < 1e-8);
    }
}

TEST_CASE("pdq effective variance follows the step^2/12 rule on the normalized step") {
    const double nv = 0.4, step = 0.7;
    CHECK(pdq_sigma_q2(step, nv) ==
          doctest::Approx(2.0 * step * step / (12.0 * (1.0 + nv))).epsilon(1e-14));
    const AdcSpec spec = AdcSpec::uniform(3, step);
    CHECK(se_gamma(SeOutput::pdq(), spec, nv) ==
          doctest::Approx(nv + pdq_sigma_q2(step, nv)).epsilon(1e-14));
    CHECK(se_gamma(SeOutput::pdq_with_sigma_q2(0.123), spec, nv) ==
          doctest::Approx(nv + 0.123).epsilon(1e-14));
    CHECK(se_gamma(SeOutput::pdq(), AdcSpec::infinite(), nv) ==
          doctest::Approx(nv).epsilon(1e-14));
}

TEST_CASE("pdq score is linear in the conditioning variable") {
    const AdcSpec spec = AdcSpec::uniform(2, 0.5);
    const SeMoments m = matched_moments(0.4);
    const SeOutput out = SeOutput::pdq();
    const double level = spec.level(2);
    const ThetaValue t1 = theta_eval(level, -1.3, out, spec, 0.5, m);
    const ThetaValue t2 = theta_eval(level, 2.1, out, spec, 0.5, m);
    CHECK(t1.deriv == doctest::Approx(t2.deriv).epsilon(1e-14));
    CHECK(t1.value - t2.value == doctest::Approx((2.1 - (-1.3)) * t1.deriv).epsilon(1e-12));
}

TEST_CASE("exact-likelihood recursion satisfies the matched-posterior identities") {
    // With the true likelihood and the true prior, the three equivalent
    // channel parameters coincide and the estimate moments collapse.
    // The identities are exact in the integrals; the residual is quadrature
    // error, so a high-order rule tightens them.
    SeConfig cfg;
    cfg.gauss_hermite_nodes = 400;
    for (const double snr_db : {-2.5, 0.0, 5.0}) {
        const double nv = SystemConfig::noise_variance_from_snr_db(snr_db);
        const SeFixedPoint fp =
            se_fixed_point(single(AdcSpec::uniform(2, 0.5), 4.0), nv, SeOutput::dq(),
                           InputDenoiser::discrete(Constellation::qpsk()), cfg, true);
        REQUIRE(fp.converged);
        for (const SeStepResult& step : fp.trajectory) {
            CHECK(step.params.d == doctest::Approx(step.params.a).epsilon(1e-6));
            CHECK(step.params.e == doctest::Approx(step.params.a).epsilon(1e-6));
            CHECK(step.moments.v_xhat ==
                  doctest::Approx(step.moments.v_xxhat).epsilon(1e-6).scale(1.0));
        }
    }
}

TEST_CASE("generic output step matches the matched-likelihood closed form") {
    // For the exact likelihood with matched moments the score is the log
    // derivative of psi, so A = lambda * E_u[ sum_r psi'(r)^2 / psi(r) ],
    // evaluated with the conditioning mean (v_xxhat / sqrt(v_xhat)) u.
    const double nv = 1.0;
    const AdcSpec spec = AdcSpec::uniform(3, 0.5);
    const double lambda = 4.0;
    const SeConfig cfg;  // nv = 1 keeps the adaptive rule at the 40-node default
    const SeMoments m = matched_moments(0.55);

    const SeStepResult got = se_step_generic(m, single(spec, lambda), nv, SeOutput::dq(),
                                             InputDenoiser::discrete(Constellation::qpsk()),
                                             cfg);

    const GaussHermiteRule& rule = cached_gauss_hermite(cfg.gauss_hermite_nodes);
    const double scale = m.v_xxhat / std::sqrt(m.v_xhat);
    double a = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double vartheta = scale * rule.nodes[i];
        double inner = 0.0;
        for (const double level : spec.levels()) {
            const double psi = psi_eval(level, vartheta, spec, nv, m);
            const double dpsi = psi_deriv(level, vartheta, spec, nv, m);
            if (psi > 0.0) inner += dpsi * dpsi / psi;
        }
        a += rule.weights[i] * inner;
    }
    a *= lambda;
    CHECK(got.params.a == doctest::Approx(a).epsilon(1e-8));
    CHECK(got.params.d == doctest::Approx(a).epsilon(1e-8));
    CHECK(got.params.e == doctest::Approx(a).epsilon(1e-8));
}

TEST_CASE("gaussian input with unquantized outputs reproduces the lmmse fixed point") {
    // Matched Gaussian recursion with full-precision antennas collapses to
    // the scalar equation p = 1 / (1 + lambda / (nv + p)) and MSE = p.
    for (const double lambda : {2.0, 4.0, 8.0}) {
        for (const double snr_db : {0.0, 10.0}) {
            const double nv = SystemConfig::noise_variance_from_snr_db(snr_db);
            const SeFixedPoint fp =
                se_fixed_point(single(AdcSpec::infinite(), lambda), nv, SeOutput::pdq(),
                               InputDenoiser::gaussian(), SeConfig{});
            REQUIRE(fp.converged);
            // p^2 + (nv + lambda - 1) p - nv = 0, positive root.
            const double b = nv + lambda - 1.0;
            const double p = (-b + std::sqrt(b * b + 4.0 * nv)) / 2.0;
            CHECK(mse_from_se(fp.moments) == doctest::Approx(p).epsilon(1e-8));
        }
    }
}

TEST_CASE("populations contribute additively to the output step") {
    const double nv = 0.5;
    const SeMoments m = matched_moments(0.3);
    const InputDenoiser den = InputDenoiser::discrete(Constellation::qpsk());
    const SeConfig cfg;
    const MixedProfile p1 = single(AdcSpec::uniform(1, 1.0), 3.0);
    const MixedProfile p2 = single(AdcSpec::uniform(3, 0.4), 2.0);
    MixedProfile both = p1;
    both.entries.push_back(p2.entries[0]);

    for (const SeOutput& out : {SeOutput::dq(), SeOutput::pdq()}) {
        const SeParams a = se_step_generic(m, p1, nv, out, den, cfg).params;
        const SeParams b = se_step_generic(m, p2, nv, out, den, cfg).params;
        const SeParams c = se_step_generic(m, both, nv, out, den, cfg).params;
        CHECK(c.a == doctest::Approx(a.a + b.a).epsilon(1e-12));
        CHECK(c.d == doctest::Approx(a.d + b.d).epsilon(1e-12));
        CHECK(c.e == doctest::Approx(a.e + b.e).epsilon(1e-12));
    }
}

TEST_CASE("moment ordering holds along every trajectory") {
    const SeConfig cfg;
    const MixedProfile profile = single(AdcSpec::uniform(2, 0.5), 4.0);
    struct Case {
        SeOutput out;
        InputDenoiser den;
    };
    const Case cases[] = {
        {SeOutput::dq(), InputDenoiser::discrete(Constellation::qpsk())},
        {SeOutput::pdq(), InputDenoiser::discrete(Constellation::qpsk())},
        {SeOutput::pdq(), InputDenoiser::gaussian()},
    };
    for (const Case& c : cases) {
        for (const double snr_db : {-5.0, 0.0, 10.0}) {
            const double nv = SystemConfig::noise_variance_from_snr_db(snr_db);
            const SeFixedPoint fp = se_fixed_point(profile, nv, c.out, c.den, cfg, true);
            for (const SeStepResult& step : fp.trajectory) {
                CHECK(step.moments.v_xhat >= -1e-12);
                CHECK(step.moments.v_xhat <= step.moments.c_xhat + 1e-12);
                CHECK(step.moments.c_xhat <= step.moments.v_x + 1e-10);
            }
        }
    }
}

TEST_CASE("error-rate and mse maps behave at the anchors") {
    CHECK(ber_qpsk({1.0, 0.0, 1.0}) == doctest::Approx(0.5));
    CHECK(ber_qpsk({1.0, 3.0902, 1.0}) == doctest::Approx(1e-3).epsilon(1e-3));
    CHECK(mse_from_se(SeMoments{}) == doctest::Approx(1.0));
    SeMoments perfect;
    perfect.v_xhat = 1.0;
    perfect.v_xxhat = 1.0;
    CHECK(mse_from_se(perfect) == doctest::Approx(0.0));
}

TEST_CASE("pure-noise limit gives chance-level detection") {
    const double nv = 1e4;
    const SeFixedPoint fp =
        se_fixed_point(single(AdcSpec::uniform(3, 0.5), 4.0), nv, SeOutput::dq(),
                       InputDenoiser::discrete(Constellation::qpsk()), SeConfig{});
    // At nv = 1e4 the residual signal still buys Q(sqrt(A)) ~ 0.49.
    CHECK(ber_qpsk(fp.params) == doctest::Approx(0.5).epsilon(0.02));
    CHECK(mse_from_se(fp.moments) == doctest::Approx(1.0).epsilon(0.02));
}
