#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "sscycle/ring.hpp"

namespace sscycle {

namespace detail {
// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

// The sitewise randomness: an infinite instruction stack at every site,
// realized lazily. Instruction (x, i) is a pure function of
// (master_seed, x, i), so re-reading never changes it and a second policy
// can replay the exact same field.
struct InstructionField {
    std::uint64_t master_seed = 0;
    int n = 0;
    double p = 0.5;      // SS lazy parameter, 0 < p < 1
    double lambda = 1.0; // ARW sleep rate, > 0

    std::uint64_t site_key(int x) const {
        return detail::mix64(master_seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(x + 1)));
    }
    static double uniform_from_key(std::uint64_t key, std::uint64_t i) {
        return (detail::mix64(key + 0xD1B54A32D192ED03ULL * i) >> 11) * 0x1.0p-53;
    }
    double uniform(int x, std::uint64_t i) const { return uniform_from_key(site_key(x), i); }

    // Table-1 distribution: (0,0) w.p. p^2; (1,0),(0,1) each p(1-p);
    // (1,1) w.p. (1-p)^2/2; (2,0),(0,2) each (1-p)^2/4.
    SsOutcome draw_ss(int x, std::uint64_t i) const { return ss_outcome_from_uniform(uniform(x, i)); }

    // Sleep w.p. lambda/(1+lambda); each step direction w.p. 1/(2(1+lambda)).
    ArwInstruction draw_arw(int x, std::uint64_t i) const { return arw_instruction_from_uniform(uniform(x, i)); }

    SsOutcome ss_outcome_from_uniform(double u) const;
    ArwInstruction arw_instruction_from_uniform(double u) const;
};

// Per-site toppling counts for a (partial) stabilization run; equals the
// number of instructions consumed at each site.
struct Odometer {
    std::vector<std::uint64_t> counts;

    Odometer() = default;
    explicit Odometer(int n) : counts(n, 0) {}
    std::uint64_t total() const;
    friend bool operator==(const Odometer&, const Odometer&) = default;
};

// true iff a(x) <= b(x) for all x
bool dominated_by(const Odometer& a, const Odometer& b);

enum class PolicyKind { MinIndex, MaxIndex, RandomLegal };

// Selects the next unstable site to topple. RandomLegal draws from its own
// policy seed, independent of the instruction field.
struct TopplingPolicy {
    PolicyKind kind = PolicyKind::MinIndex;
    std::uint64_t policy_seed = 0;
};

struct SsRun {
    SandpileConfig final;
    Odometer odometer;
    std::uint64_t sequence_length = 0;  // T_SS = sum of the odometer
};

struct ArwRun {
    ArwConfig final;
    Odometer odometer;
    std::uint64_t sequence_length = 0;  // T_ARW
};

// Repeatedly topples policy-selected unstable sites, consuming instruction
// (x, odometer(x)) at each toppling, until stable. Throws CapExceededError
// (with the partial odometer) after `cap` topplings. `trace`, when non-null,
// receives one line per toppling: step, site, instruction, config-after.
SsRun stabilize_ss(const SandpileConfig& s0, const InstructionField& field, TopplingPolicy policy,
                   std::uint64_t cap, std::ostream* trace = nullptr);
ArwRun stabilize_arw(const ArwConfig& eta0, const InstructionField& field, TopplingPolicy policy,
                     std::uint64_t cap, std::ostream* trace = nullptr);

// A legal, possibly non-stabilizing prefix: stops after max_topplings or at
// stability, whichever comes first. Used for least-action checks.
Odometer run_ss_prefix(const SandpileConfig& s0, const InstructionField& field, TopplingPolicy policy,
                       std::uint64_t max_topplings);
Odometer run_arw_prefix(const ArwConfig& eta0, const InstructionField& field, TopplingPolicy policy,
                        std::uint64_t max_topplings);

struct AbelianCheck {
    bool agree = false;
    std::vector<Odometer> odometers;  // one per policy, in input order
};

// Stabilizes under each policy against the same field; agree iff all
// odometers are pointwise identical.
AbelianCheck verify_abelian_ss(const SandpileConfig& s0, const InstructionField& field,
                               const std::vector<TopplingPolicy>& policies, std::uint64_t cap);
AbelianCheck verify_abelian_arw(const ArwConfig& eta0, const InstructionField& field,
                                const std::vector<TopplingPolicy>& policies, std::uint64_t cap);

// Runs a truncated legal prefix and a full stabilizing run on the same
// field; true iff the prefix odometer is pointwise dominated.
bool verify_least_action_ss(const SandpileConfig& s0, const InstructionField& field,
                            TopplingPolicy prefix_policy, std::uint64_t truncate_after, std::uint64_t cap);
bool verify_least_action_arw(const ArwConfig& eta0, const InstructionField& field,
                             TopplingPolicy prefix_policy, std::uint64_t truncate_after, std::uint64_t cap);

// High-throughput stabilization kernels for Monte Carlo sweeps. The toppling
// order is a stack-driven legal sequence; by the abelian property the
// odometer (hence T) matches any other legal stabilizing order on the same
// field. A capped run reports rather than throws.
struct FastResult {
    std::uint64_t topplings = 0;
    bool capped = false;
};
FastResult stabilize_ss_fast(SandpileConfig s, const InstructionField& field, std::uint64_t cap);
FastResult stabilize_arw_fast(ArwConfig eta, const InstructionField& field, std::uint64_t cap);

}  // namespace sscycle
