#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sscycle/field.hpp"
#include "sscycle/ring.hpp"

namespace sscycle {

// The fixed legal toppling prescription driving the two-topplings-per-step
// ARW chain. Even sub-step: topple the least site with 2 or more particles,
// else the least site with an active particle. Odd sub-step: the same site
// again when the even sub-step used a 2-or-more site (the remaining particle
// is still active), else the least currently-active site, if any.

struct EvenSubstep {
    int site = -1;
    bool pair_branch = false;  // true when a 2-or-more site was selected
};

// Throws IllegalToppleError on the all-sleeping configuration.
EvenSubstep even_substep_site(const ArwConfig& eta);
std::optional<int> odd_substep_site(const ArwConfig& eta, EvenSubstep even);

struct ChainStepRecord {
    int topples = 0;  // 1 or 2
    int site_even = -1;
    int site_odd = -1;  // -1 when the step ended after one toppling
    ArwInstruction instr_even = ArwInstruction::Sleep;
    ArwInstruction instr_odd = ArwInstruction::Sleep;
    bool pair_branch = false;
};

// One chain step with fixed instructions: the first toppling consumes
// `first`, the second (if any) consumes `second`. Shared by the Monte Carlo
// driver and the exact matrix construction.
ChainStepRecord apply_chain_step(ArwConfig& eta, ArwInstruction first, ArwInstruction second);

// One chain step drawing instructions from the field at per-site cursors;
// cursors advance by one per toppling at the toppled site.
ChainStepRecord arw_chain_step(ArwConfig& eta, const InstructionField& field,
                               std::vector<std::uint64_t>& cursors);

// (rho_-, rho_+) from an ordered instruction pair: each clockwise step
// contributes to rho_-, each counterclockwise step to rho_+, sleeps nothing.
SsOutcome derive_ss_outcome(ArwInstruction first, ArwInstruction second);

struct CoupledRun {
    Odometer v;      // SS odometer
    Odometer u_bar;  // ARW topplings up to the stopping time T_{-1}
    Odometer u;      // ARW topplings to full sleep
    std::uint64_t t_minus_1 = 0;  // chain-step index of first entry into H_{-1}
    std::uint64_t t_ss = 0;       // sum of v
    std::uint64_t t_arw = 0;      // sum of u
};

// Advances the ARW chain while maintaining the SS shadow state, stops the
// u_bar odometer at the first chain step whose state has one particle per
// site, then continues to full sleep. Asserts shadow consistency and the
// odometer identities v = ceil(u_bar/2) and u_bar <= u on every run; a
// violation throws CouplingViolationError and indicates a bug.
CoupledRun run_coupled(const ArwConfig& eta0, const InstructionField& field, std::uint64_t cap);

struct ArwFullRun {
    ArwConfig final;
    Odometer odometer;
};

// Runs the prescription until every particle sleeps. Requires lambda > 0.
ArwFullRun stabilize_arw_full(const ArwConfig& eta0, const InstructionField& field, std::uint64_t cap);

}  // namespace sscycle
