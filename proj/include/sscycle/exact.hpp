#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/gmp.hpp>

#include "sscycle/ring.hpp"

namespace sscycle {

// All verifier arithmetic is exact; a floating-point value appearing in any
// computation here is a defect.
using Rational = boost::multiprecision::mpq_rational;
using Matrix = std::vector<std::vector<Rational>>;  // row-stochastic, dense

Rational parse_rational(const std::string& text);  // "NUM/DEN" or "NUM"

struct SsStateSpace {
    int n = 0;
    std::vector<SandpileConfig> states;
    std::map<std::string, int> index;  // canonical text -> state index

    int index_of(const SandpileConfig& s) const;
};

struct ArwStateSpace {
    int n = 0;
    std::vector<ArwConfig> states;
    std::map<std::string, int> index;

    int index_of(const ArwConfig& eta) const;
};

// Complete duplicate-free enumerations; guarded at n <= 8.
SsStateSpace enumerate_ss_states(int n);
ArwStateSpace enumerate_arw_states(int n);

// One SS toppling at the least unstable site, Table-1 outcome probabilities
// with lazy parameter p; the stable all-ones state is absorbing.
Matrix build_ss_matrix(const SsStateSpace& space, const Rational& p);

// One chain step (two topplings under the fixed prescription), summing over
// all nine ordered instruction pairs with sequential state updates; the
// all-sleeping state is absorbing.
Matrix build_arw_chain_matrix(const ArwStateSpace& space, const Rational& lambda);

bool is_row_stochastic(const Matrix& m);

// The partition of the ARW state space induced by projecting out particle
// states; cells are identified with SS states.
struct Partition {
    std::vector<int> cell_of;                // ARW state -> cell
    std::vector<std::vector<int>> members;   // cell -> ARW states
    std::vector<int> ss_state_of_cell;       // cell -> SS state index
    int special_cell = -1;                   // the cell projecting to (1,...,1)
};

Partition project_partition(const ArwStateSpace& arw, const SsStateSpace& ss);

struct CompatibilityResult {
    bool compatible = false;
    Matrix quotient;  // over cells; the special cell's row is the identity row
    std::optional<std::string> counterexample;
};

// Lumpability check: for every cell other than the special one, the
// cell-aggregated rows of all member states must be exactly equal.
CompatibilityResult check_markov_compatibility(const Matrix& p_h, const Partition& partition);

// Pushes the point mass at eta0 through the stopped chain (special-cell rows
// replaced by self-loops), aggregates by cells, and compares exactly with
// the quotient chain's distribution at every t <= horizon.
bool check_stopped_law_equality(const Matrix& p_h, const Partition& partition, const Matrix& quotient,
                                int eta0_index, int horizon);

struct AbsorptionDistribution {
    std::vector<Rational> pmf;  // pmf[t] = Pr[T = t], t = 0..horizon
    Rational tail;              // residual mass beyond the horizon
};

// Exact hitting-time law of a set of absorbing states.
AbsorptionDistribution absorption_distribution(const Matrix& p, const std::vector<int>& absorbing,
                                               int start, int horizon);

struct VerificationReport {
    bool all_passed = false;
    std::string text;
};

// The full exact suite for one (n, lambda): state-space counts, row
// stochasticity, lumpability, quotient-equals-SS with p = lambda/(1+lambda),
// and stopped-law equality from the all-active point configuration.
// horizon = 0 selects the default 2 * |H|.
VerificationReport run_verification(int n, const Rational& lambda, int horizon = 0);

}  // namespace sscycle
