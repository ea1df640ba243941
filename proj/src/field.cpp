#include "sscycle/field.hpp"

#include <numeric>
#include <ostream>
#include <random>

namespace sscycle {

SsOutcome InstructionField::ss_outcome_from_uniform(double u) const {
    const double q = 1.0 - p;
    // cumulative thresholds in Table-1 row order
    double c = p * p;
    if (u < c) return {0, 0};
    c += p * q;
    if (u < c) return {1, 0};
    c += p * q;
    if (u < c) return {0, 1};
    c += q * q / 2.0;
    if (u < c) return {1, 1};
    c += q * q / 4.0;
    if (u < c) return {2, 0};
    return {0, 2};
}

ArwInstruction InstructionField::arw_instruction_from_uniform(double u) const {
    const double sleep_p = lambda / (1.0 + lambda);
    if (u < sleep_p) return ArwInstruction::Sleep;
    if (u < sleep_p + 0.5 / (1.0 + lambda)) return ArwInstruction::StepClockwise;
    return ArwInstruction::StepCounterclockwise;
}

std::uint64_t Odometer::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

bool dominated_by(const Odometer& a, const Odometer& b) {
    if (a.counts.size() != b.counts.size()) return false;
    for (std::size_t x = 0; x < a.counts.size(); ++x)
        if (a.counts[x] > b.counts[x]) return false;
    return true;
}

namespace {

// Select the next site to topple, or -1 when stable. `unstable` answers
// whether a site may legally be toppled in the current configuration.
template <typename UnstablePred>
int select_site(int n, PolicyKind kind, std::mt19937_64& prng, UnstablePred unstable) {
    switch (kind) {
        case PolicyKind::MinIndex:
            for (int x = 0; x < n; ++x)
                if (unstable(x)) return x;
            return -1;
        case PolicyKind::MaxIndex:
            for (int x = n - 1; x >= 0; --x)
                if (unstable(x)) return x;
            return -1;
        case PolicyKind::RandomLegal: {
            std::vector<int> candidates;
            for (int x = 0; x < n; ++x)
                if (unstable(x)) candidates.push_back(x);
            if (candidates.empty()) return -1;
            std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
            return candidates[pick(prng)];
        }
    }
    return -1;
}

}  // namespace

SsRun stabilize_ss(const SandpileConfig& s0, const InstructionField& field, TopplingPolicy policy,
                   std::uint64_t cap, std::ostream* trace) {
    const int n = field.n;
    if (s0.size() != n || s0.total() != n)
        throw InvalidSpecError("initial SS configuration must place n particles on n sites");
    SandpileConfig s = s0;
    Odometer od(n);
    std::mt19937_64 prng(policy.policy_seed);
    std::uint64_t steps = 0;
    for (;;) {
        int x = select_site(n, policy.kind, prng, [&](int y) { return s.counts[y] >= 2; });
        if (x < 0) break;
        if (steps >= cap) throw CapExceededError("SS stabilization exceeded cap", od.counts);
        SsOutcome out = field.draw_ss(x, od.counts[x]);
        apply_ss_topple_inplace(s, x, out);
        ++od.counts[x];
        ++steps;
        if (trace)
            *trace << steps - 1 << '\t' << x << '\t' << to_text(out) << '\t' << to_text(s) << '\n';
    }
    return {std::move(s), std::move(od), steps};
}

ArwRun stabilize_arw(const ArwConfig& eta0, const InstructionField& field, TopplingPolicy policy,
                     std::uint64_t cap, std::ostream* trace) {
    const int n = field.n;
    if (eta0.size() != n || eta0.total() != n)
        throw InvalidSpecError("initial ARW configuration must place n particles on n sites");
    if (!(field.lambda > 0)) throw InvalidSpecError("ARW stabilization requires lambda > 0");
    ArwConfig eta = eta0;
    Odometer od(n);
    std::mt19937_64 prng(policy.policy_seed);
    std::uint64_t steps = 0;
    for (;;) {
        int x = select_site(n, policy.kind, prng, [&](int y) { return eta.values[y].active_count() >= 1; });
        if (x < 0) break;
        if (steps >= cap) throw CapExceededError("ARW stabilization exceeded cap", od.counts);
        ArwInstruction instr = field.draw_arw(x, od.counts[x]);
        apply_arw_topple_inplace(eta, x, instr);
        ++od.counts[x];
        ++steps;
        if (trace)
            *trace << steps - 1 << '\t' << x << '\t' << to_text(instr) << '\t' << to_text(eta) << '\n';
    }
    return {std::move(eta), std::move(od), steps};
}

Odometer run_ss_prefix(const SandpileConfig& s0, const InstructionField& field, TopplingPolicy policy,
                       std::uint64_t max_topplings) {
    const int n = field.n;
    SandpileConfig s = s0;
    Odometer od(n);
    std::mt19937_64 prng(policy.policy_seed);
    for (std::uint64_t t = 0; t < max_topplings; ++t) {
        int x = select_site(n, policy.kind, prng, [&](int y) { return s.counts[y] >= 2; });
        if (x < 0) break;
        apply_ss_topple_inplace(s, x, field.draw_ss(x, od.counts[x]));
        ++od.counts[x];
    }
    return od;
}

Odometer run_arw_prefix(const ArwConfig& eta0, const InstructionField& field, TopplingPolicy policy,
                        std::uint64_t max_topplings) {
    const int n = field.n;
    ArwConfig eta = eta0;
    Odometer od(n);
    std::mt19937_64 prng(policy.policy_seed);
    for (std::uint64_t t = 0; t < max_topplings; ++t) {
        int x = select_site(n, policy.kind, prng, [&](int y) { return eta.values[y].active_count() >= 1; });
        if (x < 0) break;
        apply_arw_topple_inplace(eta, x, field.draw_arw(x, od.counts[x]));
        ++od.counts[x];
    }
    return od;
}

AbelianCheck verify_abelian_ss(const SandpileConfig& s0, const InstructionField& field,
                               const std::vector<TopplingPolicy>& policies, std::uint64_t cap) {
    AbelianCheck result;
    for (const auto& policy : policies)
        result.odometers.push_back(stabilize_ss(s0, field, policy, cap).odometer);
    result.agree = true;
    for (std::size_t i = 1; i < result.odometers.size(); ++i)
        if (!(result.odometers[i] == result.odometers[0])) result.agree = false;
    return result;
}

AbelianCheck verify_abelian_arw(const ArwConfig& eta0, const InstructionField& field,
                                const std::vector<TopplingPolicy>& policies, std::uint64_t cap) {
    AbelianCheck result;
    for (const auto& policy : policies)
        result.odometers.push_back(stabilize_arw(eta0, field, policy, cap).odometer);
    result.agree = true;
    for (std::size_t i = 1; i < result.odometers.size(); ++i)
        if (!(result.odometers[i] == result.odometers[0])) result.agree = false;
    return result;
}

bool verify_least_action_ss(const SandpileConfig& s0, const InstructionField& field,
                            TopplingPolicy prefix_policy, std::uint64_t truncate_after, std::uint64_t cap) {
    Odometer prefix = run_ss_prefix(s0, field, prefix_policy, truncate_after);
    Odometer full = stabilize_ss(s0, field, TopplingPolicy{PolicyKind::MinIndex, 0}, cap).odometer;
    return dominated_by(prefix, full);
}

bool verify_least_action_arw(const ArwConfig& eta0, const InstructionField& field,
                             TopplingPolicy prefix_policy, std::uint64_t truncate_after, std::uint64_t cap) {
    Odometer prefix = run_arw_prefix(eta0, field, prefix_policy, truncate_after);
    Odometer full = stabilize_arw(eta0, field, TopplingPolicy{PolicyKind::MinIndex, 0}, cap).odometer;
    return dominated_by(prefix, full);
}

FastResult stabilize_ss_fast(SandpileConfig s, const InstructionField& field, std::uint64_t cap) {
    const int n = field.n;
    const double p = field.p, q = 1.0 - p;
    const double c0 = p * p;
    const double c1 = c0 + p * q;
    const double c2 = c1 + p * q;
    const double c3 = c2 + q * q / 2.0;
    const double c4 = c3 + q * q / 4.0;

    std::vector<std::uint64_t> key(n), cursor(n, 0);
    for (int x = 0; x < n; ++x) key[x] = field.site_key(x);

    std::vector<int> stack;
    for (int x = 0; x < n; ++x)
        if (s.counts[x] >= 2) stack.push_back(x);

    std::uint64_t topplings = 0;
    while (!stack.empty()) {
        int x = stack.back();
        if (s.counts[x] < 2) {
            stack.pop_back();
            continue;
        }
        if (topplings >= cap) return {topplings, true};
        double u = InstructionField::uniform_from_key(key[x], cursor[x]++);
        ++topplings;
        int rm, rp;
        if (u < c0) continue;  // null toppling
        else if (u < c1) { rm = 1; rp = 0; }
        else if (u < c2) { rm = 0; rp = 1; }
        else if (u < c3) { rm = 1; rp = 1; }
        else if (u < c4) { rm = 2; rp = 0; }
        else { rm = 0; rp = 2; }
        s.counts[x] -= rm + rp;
        if (rm) {
            int d = cw_neighbor(x, n);
            if ((s.counts[d] += rm) >= 2) stack.push_back(d);
        }
        if (rp) {
            int d = ccw_neighbor(x, n);
            if ((s.counts[d] += rp) >= 2) stack.push_back(d);
        }
    }
    return {topplings, false};
}

FastResult stabilize_arw_fast(ArwConfig eta, const InstructionField& field, std::uint64_t cap) {
    const int n = field.n;
    const double sleep_p = field.lambda / (1.0 + field.lambda);
    const double cw_p = sleep_p + 0.5 / (1.0 + field.lambda);

    // flat encoding: -1 = sleeper, k >= 0 = k active particles
    std::vector<int> v(n);
    for (int x = 0; x < n; ++x)
        v[x] = eta.values[x].is_sleeper() ? -1 : eta.values[x].active_count();

    std::vector<std::uint64_t> key(n), cursor(n, 0);
    for (int x = 0; x < n; ++x) key[x] = field.site_key(x);

    std::vector<int> stack;
    for (int x = 0; x < n; ++x)
        if (v[x] >= 1) stack.push_back(x);

    std::uint64_t topplings = 0;
    while (!stack.empty()) {
        int x = stack.back();
        if (v[x] < 1) {
            stack.pop_back();
            continue;
        }
        if (topplings >= cap) return {topplings, true};
        double u = InstructionField::uniform_from_key(key[x], cursor[x]++);
        ++topplings;
        if (u < sleep_p) {
            if (v[x] == 1) v[x] = -1;  // sleep succeeds only when alone
            continue;
        }
        int d = u < cw_p ? cw_neighbor(x, n) : ccw_neighbor(x, n);
        --v[x];
        v[d] = v[d] == -1 ? 2 : v[d] + 1;  // arrival wakes a sleeper
        stack.push_back(d);
    }
    return {topplings, false};
}

}  // namespace sscycle
