#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sscycle/coupling.hpp"

using namespace sscycle;

TEST_CASE("derive_ss_outcome over all nine ordered pairs") {
    using I = ArwInstruction;
    CHECK(derive_ss_outcome(I::Sleep, I::Sleep) == SsOutcome{0, 0});
    CHECK(derive_ss_outcome(I::StepClockwise, I::Sleep) == SsOutcome{1, 0});
    CHECK(derive_ss_outcome(I::Sleep, I::StepClockwise) == SsOutcome{1, 0});
    CHECK(derive_ss_outcome(I::StepCounterclockwise, I::Sleep) == SsOutcome{0, 1});
    CHECK(derive_ss_outcome(I::Sleep, I::StepCounterclockwise) == SsOutcome{0, 1});
    CHECK(derive_ss_outcome(I::StepClockwise, I::StepCounterclockwise) == SsOutcome{1, 1});
    CHECK(derive_ss_outcome(I::StepCounterclockwise, I::StepClockwise) == SsOutcome{1, 1});
    CHECK(derive_ss_outcome(I::StepClockwise, I::StepClockwise) == SsOutcome{2, 0});
    CHECK(derive_ss_outcome(I::StepCounterclockwise, I::StepCounterclockwise) == SsOutcome{0, 2});
}

TEST_CASE("forced chain-step traces") {
    using I = ArwInstruction;
    // paired toppling at the 2-or-more site
    ArwConfig eta = parse_arw("3,0,0");
    auto rec = apply_chain_step(eta, I::StepClockwise, I::StepCounterclockwise);
    CHECK(rec.topples == 2);
    CHECK(rec.site_even == 0);
    CHECK(rec.site_odd == 0);
    CHECK(rec.pair_branch);
    CHECK(eta == parse_arw("1,1,1"));

    // both sleeps fail at a crowded site
    eta = parse_arw("2,0,s");
    rec = apply_chain_step(eta, I::Sleep, I::Sleep);
    CHECK(eta == parse_arw("2,0,s"));
    CHECK(rec.topples == 2);

    // else-branch: topple the least active site; on a successful sleep the
    // odd sub-step moves to the next active site
    eta = parse_arw("1,1,s");
    rec = apply_chain_step(eta, I::Sleep, I::Sleep);
    CHECK_FALSE(rec.pair_branch);
    CHECK(rec.site_even == 0);
    CHECK(rec.site_odd == 1);
    CHECK(eta == parse_arw("s,s,s"));

    // sleeping the last active particle ends the step after one toppling
    eta = parse_arw("1,s,s");
    rec = apply_chain_step(eta, I::Sleep, I::Sleep);
    CHECK(rec.topples == 1);
    CHECK(eta.is_stable());

    CHECK_THROWS_AS(apply_chain_step(eta, I::Sleep, I::Sleep), IllegalToppleError);
}

TEST_CASE("coupled run from a state already in H_{-1}") {
    InstructionField field{5, 4, 0.5, 1.0};
    CoupledRun run = run_coupled(ArwConfig::all_active(4), field, 1 << 20);
    CHECK(run.t_minus_1 == 0);
    CHECK(run.u_bar.total() == 0);
    CHECK(run.v.total() == 0);
    CHECK(run.t_arw == run.u.total());
    CHECK(run.t_arw >= 4);  // every particle still has to fall asleep
}

TEST_CASE("single forced chain step from (3,0,0)") {
    // find a seed whose first instruction pair at site 0 is (cw, ccw)
    for (std::uint64_t seed = 0; seed < 4096; ++seed) {
        InstructionField field{seed, 3, 0.5, 1.0};
        if (field.draw_arw(0, 0) != ArwInstruction::StepClockwise) continue;
        if (field.draw_arw(0, 1) != ArwInstruction::StepCounterclockwise) continue;
        CoupledRun run = run_coupled(ArwConfig::point(3), field, 1 << 20);
        CHECK(run.t_minus_1 == 1);
        CHECK(run.u_bar.counts == std::vector<std::uint64_t>{2, 0, 0});
        CHECK(run.v.counts == std::vector<std::uint64_t>{1, 0, 0});
        return;
    }
    FAIL("no seed with the forced first pair found");
}

TEST_CASE("odometer identities over seeded runs") {
    std::mt19937_64 prng(41);
    for (int iter = 0; iter < 300; ++iter) {
        int n = 3 + static_cast<int>(prng() % 14);
        double lambda = (iter % 3 == 0) ? 1.0 : (iter % 3 == 1) ? 3.0 : std::log(n);
        InstructionField field{prng(), n, lambda / (1 + lambda), lambda};
        // run_coupled throws CouplingViolationError if any identity fails
        CoupledRun run = run_coupled(ArwConfig::point(n), field, 64ULL * n * n * n);
        CHECK(run.t_ss == run.v.total());
        CHECK(run.t_arw == run.u.total());
        CHECK(run.u_bar.total() == 2 * run.t_ss);
        // loose aggregate bound: the sleep phase only adds topplings
        CHECK(run.t_arw + n >= 2 * run.t_ss);
    }
}

TEST_CASE("full ARW stabilization") {
    InstructionField field{9, 5, 0.5, 1.0};
    auto run = stabilize_arw_full(ArwConfig::all_sleeping(5), field, 100);
    CHECK(run.odometer.total() == 0);

    run = stabilize_arw_full(ArwConfig::point(5), field, 1 << 22);
    CHECK(run.final == ArwConfig::all_sleeping(5));

    CHECK_THROWS_AS(run_coupled(ArwConfig::point(5), InstructionField{9, 5, 0.5, 0.0}, 100),
                    InvalidSpecError);
}

TEST_CASE("all-active start at high lambda: modal odometer is one toppling per site") {
    // each particle sleeps immediately w.p. (lambda/(1+lambda))^n
    const int n = 3;
    const double lambda = 100.0;
    const int trials = 10000;
    int modal = 0;
    std::vector<std::uint64_t> ones(n, 1);
    for (int trial = 0; trial < trials; ++trial) {
        InstructionField field{detail::mix64(0xABCD + trial), n, lambda / (1 + lambda), lambda};
        auto run = stabilize_arw_full(ArwConfig::all_active(n), field, 1 << 20);
        if (run.odometer.counts == ones) ++modal;
    }
    double expected = std::pow(lambda / (1 + lambda), n);
    double se = std::sqrt(expected * (1 - expected) * trials);
    CHECK(std::abs(modal - expected * trials) < 4 * se);
}
