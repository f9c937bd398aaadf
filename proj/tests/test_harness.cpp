#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>

#include <omp.h>

#include "mimo/harness.hpp"

using namespace mimo;

namespace {

ExperimentSpec small_spec() {
    ExperimentSpec spec;
    spec.num_users = 8;
    spec.num_antennas = 32;
    spec.constellation = Constellation::qpsk();
    spec.bank = AdcBank::uniform(32, AdcSpec::uniform(2, 0.5));
    spec.detector = DetectorKind::DQ;
    spec.trials = 40;
    spec.base_seed = 17;
    spec.snr_grid_db = {0.0, 5.0};
    return spec;
}

bool identical(const ExperimentResult& a, const ExperimentResult& b) {
    if (a.records.size() != b.records.size()) return false;
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        if (std::memcmp(&a.records[i], &b.records[i], sizeof(SnrRecord)) != 0) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("results are bit-identical for any worker count") {
    const ExperimentSpec spec = small_spec();
    const ExperimentResult reference = run_monte_carlo(spec, RunMode::Serial);
    for (const int threads : {1, 4, 8}) {
        omp_set_num_threads(threads);
        CHECK(identical(run_monte_carlo(spec, RunMode::Parallel), reference));
    }
    omp_set_num_threads(1);
}

TEST_CASE("reruns with the same seed reproduce, different seeds differ") {
    const ExperimentSpec spec = small_spec();
    const ExperimentResult a = run_monte_carlo(spec);
    const ExperimentResult b = run_monte_carlo(spec);
    CHECK(identical(a, b));
    ExperimentSpec other = spec;
    other.base_seed = 18;
    CHECK(!identical(run_monte_carlo(other), a));
}

TEST_CASE("record bookkeeping is conserved") {
    const ExperimentSpec spec = small_spec();
    const ExperimentResult res = run_monte_carlo(spec);
    REQUIRE(res.records.size() == spec.snr_grid_db.size());
    for (std::size_t i = 0; i < res.records.size(); ++i) {
        const SnrRecord& r = res.records[i];
        CHECK(r.snr_db == spec.snr_grid_db[i]);
        CHECK(r.trials_run == spec.trials);
        // Two bits per QPSK symbol per user per trial.
        CHECK(r.bits_total == 2LL * spec.trials * spec.num_users);
        CHECK(r.ber == doctest::Approx(static_cast<double>(r.bit_errors) / r.bits_total));
        CHECK(r.ber_stderr >= 0.0);
        CHECK(r.mse_stderr >= 0.0);
        CHECK(r.nonconverged >= 0);
    }
    // Higher SNR should not be worse in this regime.
    CHECK(res.records[1].ber <= res.records[0].ber);
}

TEST_CASE("invalid specs are rejected") {
    ExperimentSpec spec = small_spec();
    spec.trials = 0;
    CHECK_THROWS_AS(run_monte_carlo(spec), std::invalid_argument);
    spec = small_spec();
    spec.snr_grid_db.clear();
    CHECK_THROWS_AS(run_monte_carlo(spec), std::invalid_argument);
    spec = small_spec();
    spec.bank = AdcBank::uniform(16, AdcSpec::uniform(2, 0.5));  // wrong length
    CHECK_THROWS_AS(run_monte_carlo(spec), std::invalid_argument);
}

TEST_CASE("full-precision high-snr detection is error free") {
    ExperimentSpec spec = small_spec();
    spec.bank = AdcBank::uniform(spec.num_antennas, AdcSpec::infinite());
    spec.snr_grid_db = {25.0};
    spec.trials = 20;
    const ExperimentResult res = run_monte_carlo(spec);
    CHECK(res.records[0].bit_errors == 0);
    CHECK(res.records[0].mse < 1e-2);
}

TEST_CASE("profile entries carry lambda = antennas per user") {
    const AdcBank bank = AdcBank::mixed(8, AdcSpec::uniform(1, 0.5), 2);
    const MixedProfile profile = profile_from_bank(bank, 2);
    REQUIRE(profile.entries.size() == 2);
    CHECK(profile.lambda() == doctest::Approx(4.0));
    double lambda_inf = 0.0, lambda_1bit = 0.0;
    for (const ProfileEntry& e : profile.entries) {
        (e.spec.is_infinite() ? lambda_inf : lambda_1bit) = e.lambda;
    }
    CHECK(lambda_inf == doctest::Approx(1.0));
    CHECK(lambda_1bit == doctest::Approx(3.0));
}

TEST_CASE("asymptotic and finite-size predictions agree on a small waterfall point") {
    ExperimentSpec spec = small_spec();
    spec.num_users = 16;
    spec.num_antennas = 64;
    spec.bank = AdcBank::uniform(64, AdcSpec::uniform(3, 0.5));
    spec.trials = 200;
    spec.snr_grid_db = {0.0};
    const SeMcComparison cmp = compare_se_vs_mc(spec, SeConfig{});
    REQUIRE(cmp.rows.size() == 1);
    CHECK(cmp.rows[0].mc_ber ==
          doctest::Approx(cmp.rows[0].se_ber).epsilon(0.35));  // finite-size slack
    REQUIRE(!cmp.trajectories.empty());
    CHECK(cmp.trajectories[0].size() > 3);
}
