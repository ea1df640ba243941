#include "sscycle/coupling.hpp"

namespace sscycle {

EvenSubstep even_substep_site(const ArwConfig& eta) {
    Classification c = classify(eta);
    if (c.min_two_site) return {*c.min_two_site, true};
    if (c.min_active_site) return {*c.min_active_site, false};
    throw IllegalToppleError("chain step invoked on the all-sleeping configuration");
}

std::optional<int> odd_substep_site(const ArwConfig& eta, EvenSubstep even) {
    if (even.pair_branch) return even.site;  // the remaining particle is still active
    Classification c = classify(eta);
    return c.min_active_site;  // absent when the even sub-step slept the last active particle
}

ChainStepRecord apply_chain_step(ArwConfig& eta, ArwInstruction first, ArwInstruction second) {
    ChainStepRecord rec;
    EvenSubstep even = even_substep_site(eta);
    rec.site_even = even.site;
    rec.pair_branch = even.pair_branch;
    rec.instr_even = first;
    apply_arw_topple_inplace(eta, even.site, first);
    rec.topples = 1;
    if (auto odd = odd_substep_site(eta, even)) {
        rec.site_odd = *odd;
        rec.instr_odd = second;
        apply_arw_topple_inplace(eta, *odd, second);
        rec.topples = 2;
    }
    return rec;
}

ChainStepRecord arw_chain_step(ArwConfig& eta, const InstructionField& field,
                               std::vector<std::uint64_t>& cursors) {
    ChainStepRecord rec;
    EvenSubstep even = even_substep_site(eta);
    rec.site_even = even.site;
    rec.pair_branch = even.pair_branch;
    rec.instr_even = field.draw_arw(even.site, cursors[even.site]++);
    apply_arw_topple_inplace(eta, even.site, rec.instr_even);
    rec.topples = 1;
    if (auto odd = odd_substep_site(eta, even)) {
        rec.site_odd = *odd;
        rec.instr_odd = field.draw_arw(*odd, cursors[*odd]++);
        apply_arw_topple_inplace(eta, *odd, rec.instr_odd);
        rec.topples = 2;
    }
    return rec;
}

SsOutcome derive_ss_outcome(ArwInstruction first, ArwInstruction second) {
    SsOutcome out;
    for (ArwInstruction instr : {first, second}) {
        if (instr == ArwInstruction::StepClockwise) ++out.rho_minus;
        if (instr == ArwInstruction::StepCounterclockwise) ++out.rho_plus;
    }
    return out;
}

CoupledRun run_coupled(const ArwConfig& eta0, const InstructionField& field, std::uint64_t cap) {
    const int n = field.n;
    if (eta0.size() != n || eta0.total() != n)
        throw InvalidSpecError("initial ARW configuration must place n particles on n sites");
    if (!(field.lambda > 0)) throw InvalidSpecError("coupled run requires lambda > 0");

    ArwConfig eta = eta0;
    SandpileConfig shadow = project(eta0);
    CoupledRun run;
    run.v = Odometer(n);
    run.u_bar = Odometer(n);
    run.u = Odometer(n);
    std::vector<std::uint64_t> cursors(n, 0);

    // Phase 1: off H_{-1}, every chain step is two topplings at one common
    // 2-or-more site, mirrored by a single SS toppling at that site.
    std::uint64_t t = 0;
    std::uint64_t topplings = 0;
    while (!classify(eta).counts_all_ones) {
        if (topplings >= cap) throw CapExceededError("coupled run exceeded cap", run.u.counts);
        ChainStepRecord rec = arw_chain_step(eta, field, cursors);
        if (!rec.pair_branch || rec.topples != 2 || rec.site_odd != rec.site_even)
            throw CouplingViolationError("pre-stop chain step was not a paired toppling");
        run.u_bar.counts[rec.site_even] += 2;
        topplings += 2;
        apply_ss_topple_inplace(shadow, rec.site_even, derive_ss_outcome(rec.instr_even, rec.instr_odd));
        ++run.v.counts[rec.site_even];
        ++t;
        if (!(project(eta) == shadow))
            throw CouplingViolationError("projected ARW state diverged from the SS shadow at step " +
                                         std::to_string(t));
    }
    run.t_minus_1 = t;
    run.u = run.u_bar;

    // Phase 2: continue the prescription to full sleep; only u advances.
    while (!eta.is_stable()) {
        if (topplings >= cap) throw CapExceededError("coupled run exceeded cap", run.u.counts);
        ChainStepRecord rec = arw_chain_step(eta, field, cursors);
        ++run.u.counts[rec.site_even];
        if (rec.topples == 2) ++run.u.counts[rec.site_odd];
        topplings += rec.topples;
    }

    run.t_ss = run.v.total();
    run.t_arw = run.u.total();

    for (int x = 0; x < n; ++x) {
        if (run.v.counts[x] != (run.u_bar.counts[x] + 1) / 2)
            throw CouplingViolationError("odometer identity v = ceil(u_bar/2) failed at site " +
                                         std::to_string(x));
        if (run.u_bar.counts[x] > run.u.counts[x])
            throw CouplingViolationError("odometer domination u_bar <= u failed at site " +
                                         std::to_string(x));
    }
    if (!shadow.is_stable())
        throw CouplingViolationError("SS shadow not stable at the stopping time");
    return run;
}

ArwFullRun stabilize_arw_full(const ArwConfig& eta0, const InstructionField& field, std::uint64_t cap) {
    const int n = field.n;
    if (eta0.size() != n || eta0.total() != n)
        throw InvalidSpecError("initial ARW configuration must place n particles on n sites");
    if (!(field.lambda > 0)) throw InvalidSpecError("ARW stabilization requires lambda > 0");
    ArwConfig eta = eta0;
    Odometer od(n);
    std::vector<std::uint64_t> cursors(n, 0);
    std::uint64_t topplings = 0;
    while (!eta.is_stable()) {
        if (topplings >= cap) throw CapExceededError("ARW stabilization exceeded cap", od.counts);
        ChainStepRecord rec = arw_chain_step(eta, field, cursors);
        ++od.counts[rec.site_even];
        if (rec.topples == 2) ++od.counts[rec.site_odd];
        topplings += rec.topples;
    }
    return {std::move(eta), std::move(od)};
}

}  // namespace sscycle
