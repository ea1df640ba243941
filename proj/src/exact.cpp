#include "sscycle/exact.hpp"

#include <sstream>

#include "sscycle/coupling.hpp"

namespace sscycle {

Rational parse_rational(const std::string& text) {
    auto slash = text.find('/');
    try {
        if (slash == std::string::npos) return Rational(text);
        Rational num(text.substr(0, slash));
        Rational den(text.substr(slash + 1));
        if (den == 0) throw InvalidSpecError("zero denominator in '" + text + "'");
        return num / den;
    } catch (const std::runtime_error&) {
        throw InvalidSpecError("bad rational '" + text + "'");
    }
}

int SsStateSpace::index_of(const SandpileConfig& s) const {
    auto it = index.find(to_text(s));
    if (it == index.end()) throw InvalidSpecError("SS state not in enumerated space: " + to_text(s));
    return it->second;
}

int ArwStateSpace::index_of(const ArwConfig& eta) const {
    auto it = index.find(to_text(eta));
    if (it == index.end()) throw InvalidSpecError("ARW state not in enumerated space: " + to_text(eta));
    return it->second;
}

namespace {

constexpr int kMaxEnumerationN = 8;

void enumerate_ss_rec(int n, int site, int remaining, std::vector<int>& cur, SsStateSpace& out) {
    if (site == n - 1) {
        cur[site] = remaining;
        SandpileConfig s{cur};
        out.index.emplace(to_text(s), static_cast<int>(out.states.size()));
        out.states.push_back(std::move(s));
        return;
    }
    for (int k = 0; k <= remaining; ++k) {
        cur[site] = k;
        enumerate_ss_rec(n, site + 1, remaining - k, cur, out);
    }
}

void enumerate_arw_rec(int n, int site, int remaining, std::vector<NsValue>& cur, ArwStateSpace& out) {
    if (site == n) {
        if (remaining != 0) return;
        ArwConfig eta{cur};
        out.index.emplace(to_text(eta), static_cast<int>(out.states.size()));
        out.states.push_back(std::move(eta));
        return;
    }
    for (int k = 0; k <= remaining; ++k) {
        cur[site] = NsValue::active(k);
        enumerate_arw_rec(n, site + 1, remaining - k, cur, out);
        if (k == 1) {
            // a lone particle may instead be sleeping
            cur[site] = NsValue::sleeper();
            enumerate_arw_rec(n, site + 1, remaining - 1, cur, out);
        }
    }
}

}  // namespace

SsStateSpace enumerate_ss_states(int n) {
    if (n < 2 || n > kMaxEnumerationN)
        throw SizeGuardError("state enumeration supports 2 <= n <= " + std::to_string(kMaxEnumerationN));
    SsStateSpace out;
    out.n = n;
    std::vector<int> cur(n, 0);
    enumerate_ss_rec(n, 0, n, cur, out);
    return out;
}

ArwStateSpace enumerate_arw_states(int n) {
    if (n < 2 || n > kMaxEnumerationN)
        throw SizeGuardError("state enumeration supports 2 <= n <= " + std::to_string(kMaxEnumerationN));
    ArwStateSpace out;
    out.n = n;
    std::vector<NsValue> cur(n, NsValue::active(0));
    enumerate_arw_rec(n, 0, n, cur, out);
    return out;
}

Matrix build_ss_matrix(const SsStateSpace& space, const Rational& p) {
    if (!(p > 0 && p < 1)) throw InvalidSpecError("lazy parameter must satisfy 0 < p < 1");
    const int count = static_cast<int>(space.states.size());
    const Rational q = 1 - p;
    // Table-1 outcome law
    const std::pair<SsOutcome, Rational> outcomes[6] = {
        {{0, 0}, p * p},         {{1, 0}, p * q},         {{0, 1}, p * q},
        {{1, 1}, q * q / 2},     {{2, 0}, q * q / 4},     {{0, 2}, q * q / 4},
    };
    Matrix m(count, std::vector<Rational>(count, Rational(0)));
    for (int i = 0; i < count; ++i) {
        const SandpileConfig& s = space.states[i];
        Classification c = classify(s);
        if (!c.min_two_site) {
            m[i][i] = 1;  // stable state absorbing
            continue;
        }
        for (const auto& [out, prob] : outcomes) {
            SandpileConfig next = apply_ss_topple(s, *c.min_two_site, out);
            m[i][space.index_of(next)] += prob;
        }
    }
    return m;
}

Matrix build_arw_chain_matrix(const ArwStateSpace& space, const Rational& lambda) {
    if (!(lambda > 0)) throw InvalidSpecError("sleep rate must satisfy lambda > 0");
    const int count = static_cast<int>(space.states.size());
    const Rational sleep_p = lambda / (1 + lambda);
    const Rational step_p = Rational(1) / (2 * (1 + lambda));
    const std::pair<ArwInstruction, Rational> instrs[3] = {
        {ArwInstruction::Sleep, sleep_p},
        {ArwInstruction::StepClockwise, step_p},
        {ArwInstruction::StepCounterclockwise, step_p},
    };
    Matrix m(count, std::vector<Rational>(count, Rational(0)));
    for (int i = 0; i < count; ++i) {
        const ArwConfig& eta = space.states[i];
        if (eta.is_stable()) {
            m[i][i] = 1;
            continue;
        }
        // Nine ordered instruction pairs; when the step ends after a single
        // toppling, the second instruction is never consumed and the sum
        // over it just contributes the first instruction's probability.
        for (const auto& [i1, p1] : instrs) {
            for (const auto& [i2, p2] : instrs) {
                ArwConfig next = eta;
                apply_chain_step(next, i1, i2);
                m[i][space.index_of(next)] += p1 * p2;
            }
        }
    }
    return m;
}

bool is_row_stochastic(const Matrix& m) {
    for (const auto& row : m) {
        Rational sum(0);
        for (const Rational& entry : row) {
            if (entry < 0) return false;
            sum += entry;
        }
        if (sum != 1) return false;
    }
    return true;
}

Partition project_partition(const ArwStateSpace& arw, const SsStateSpace& ss) {
    Partition part;
    const int cells = static_cast<int>(ss.states.size());
    part.cell_of.resize(arw.states.size());
    part.members.resize(cells);
    part.ss_state_of_cell.resize(cells);
    for (int c = 0; c < cells; ++c) part.ss_state_of_cell[c] = c;
    for (std::size_t i = 0; i < arw.states.size(); ++i) {
        int cell = ss.index_of(project(arw.states[i]));
        part.cell_of[i] = cell;
        part.members[cell].push_back(static_cast<int>(i));
    }
    part.special_cell = ss.index_of(SandpileConfig::all_ones(arw.n));
    return part;
}

CompatibilityResult check_markov_compatibility(const Matrix& p_h, const Partition& partition) {
    const int cells = static_cast<int>(partition.members.size());
    CompatibilityResult result;
    result.compatible = true;
    result.quotient.assign(cells, std::vector<Rational>(cells, Rational(0)));

    for (int cell = 0; cell < cells; ++cell) {
        if (partition.members[cell].empty())
            throw InvalidSpecError("partition has an empty cell");
        if (cell == partition.special_cell) {
            result.quotient[cell][cell] = 1;
            continue;
        }
        std::vector<Rational> reference;
        for (int state : partition.members[cell]) {
            std::vector<Rational> aggregated(cells, Rational(0));
            for (std::size_t j = 0; j < p_h[state].size(); ++j)
                aggregated[partition.cell_of[j]] += p_h[state][j];
            if (reference.empty()) {
                reference = aggregated;
            } else if (aggregated != reference) {
                result.compatible = false;
                if (!result.counterexample) {
                    for (int target = 0; target < cells; ++target) {
                        if (aggregated[target] != reference[target]) {
                            std::ostringstream os;
                            os << "cell " << cell << ": states " << partition.members[cell][0]
                               << " and " << state << " disagree on transition to cell " << target
                               << " (" << reference[target] << " vs " << aggregated[target] << ")";
                            result.counterexample = os.str();
                            break;
                        }
                    }
                }
            }
        }
        result.quotient[cell] = std::move(reference);
    }
    return result;
}

bool check_stopped_law_equality(const Matrix& p_h, const Partition& partition, const Matrix& quotient,
                                int eta0_index, int horizon) {
    if (horizon < 1) throw InvalidSpecError("horizon must be >= 1");
    const int states = static_cast<int>(p_h.size());
    const int cells = static_cast<int>(partition.members.size());

    // stopped chain: special-cell states become self-loops
    Matrix stopped = p_h;
    for (int state : partition.members[partition.special_cell]) {
        stopped[state].assign(states, Rational(0));
        stopped[state][state] = 1;
    }

    std::vector<Rational> dist_h(states, Rational(0));
    dist_h[eta0_index] = 1;
    std::vector<Rational> dist_s(cells, Rational(0));
    dist_s[partition.cell_of[eta0_index]] = 1;

    for (int t = 0; t <= horizon; ++t) {
        std::vector<Rational> aggregated(cells, Rational(0));
        for (int i = 0; i < states; ++i)
            if (dist_h[i] != 0) aggregated[partition.cell_of[i]] += dist_h[i];
        if (aggregated != dist_s) return false;
        if (t == horizon) break;

        std::vector<Rational> next_h(states, Rational(0));
        for (int i = 0; i < states; ++i) {
            if (dist_h[i] == 0) continue;
            for (int j = 0; j < states; ++j)
                if (stopped[i][j] != 0) next_h[j] += dist_h[i] * stopped[i][j];
        }
        dist_h = std::move(next_h);

        std::vector<Rational> next_s(cells, Rational(0));
        for (int i = 0; i < cells; ++i) {
            if (dist_s[i] == 0) continue;
            for (int j = 0; j < cells; ++j)
                if (quotient[i][j] != 0) next_s[j] += dist_s[i] * quotient[i][j];
        }
        dist_s = std::move(next_s);
    }
    return true;
}

AbsorptionDistribution absorption_distribution(const Matrix& p, const std::vector<int>& absorbing,
                                               int start, int horizon) {
    const int states = static_cast<int>(p.size());
    for (int a : absorbing)
        if (p[a][a] != 1) throw InvalidSpecError("state " + std::to_string(a) + " is not absorbing");

    std::vector<bool> is_absorbing(states, false);
    for (int a : absorbing) is_absorbing[a] = true;

    std::vector<Rational> dist(states, Rational(0));
    dist[start] = 1;

    AbsorptionDistribution result;
    Rational prev_mass(0);
    for (int t = 0; t <= horizon; ++t) {
        if (t > 0) {
            std::vector<Rational> next(states, Rational(0));
            for (int i = 0; i < states; ++i) {
                if (dist[i] == 0) continue;
                for (int j = 0; j < states; ++j)
                    if (p[i][j] != 0) next[j] += dist[i] * p[i][j];
            }
            dist = std::move(next);
        }
        Rational mass(0);
        for (int i = 0; i < states; ++i)
            if (is_absorbing[i]) mass += dist[i];
        result.pmf.push_back(mass - prev_mass);
        prev_mass = mass;
    }
    result.tail = 1 - prev_mass;
    return result;
}

VerificationReport run_verification(int n, const Rational& lambda, int horizon) {
    VerificationReport report;
    std::ostringstream os;
    bool ok = true;
    auto check = [&](const std::string& name, bool passed, const std::string& detail = "") {
        os << (passed ? "PASS" : "FAIL") << "  " << name;
        if (!detail.empty()) os << "  [" << detail << "]";
        os << '\n';
        ok = ok && passed;
    };

    SsStateSpace ss = enumerate_ss_states(n);
    ArwStateSpace arw = enumerate_arw_states(n);
    os << "n = " << n << ", lambda = " << lambda << ": |S| = " << ss.states.size()
       << ", |H| = " << arw.states.size() << '\n';

    // |S| = C(2n-1, n-1)
    long long expected_ss = 1;
    for (int k = 1; k <= n - 1; ++k) expected_ss = expected_ss * (n + k) / k;
    check("SS state count matches stars-and-bars",
          static_cast<long long>(ss.states.size()) == expected_ss);

    Partition part = project_partition(arw, ss);
    check("cell H_{-1} has 2^n states",
          part.members[part.special_cell].size() == (std::size_t{1} << n));

    Rational p = lambda / (1 + lambda);
    Matrix p_s = build_ss_matrix(ss, p);
    Matrix p_h = build_arw_chain_matrix(arw, lambda);
    check("SS matrix row-stochastic", is_row_stochastic(p_s));
    check("ARW chain matrix row-stochastic", is_row_stochastic(p_h));

    CompatibilityResult compat = check_markov_compatibility(p_h, part);
    check("partition Markov-compatible up to H_{-1}", compat.compatible,
          compat.counterexample.value_or(""));
    check("quotient matrix row-stochastic", is_row_stochastic(compat.quotient));

    // Lemma: the quotient equals the SS chain with p = lambda/(1+lambda),
    // entrywise, under the cell <-> SS-state identification.
    bool quotient_equal = compat.compatible;
    if (quotient_equal) {
        const int cells = static_cast<int>(part.members.size());
        for (int i = 0; i < cells && quotient_equal; ++i)
            for (int j = 0; j < cells && quotient_equal; ++j)
                if (compat.quotient[i][j] != p_s[part.ss_state_of_cell[i]][part.ss_state_of_cell[j]])
                    quotient_equal = false;
    }
    check("quotient chain equals SS chain with p = lambda/(1+lambda)", quotient_equal);

    if (horizon <= 0) horizon = 2 * static_cast<int>(arw.states.size());
    int eta0 = arw.index_of(ArwConfig::point(n));
    bool law_equal = compat.compatible &&
                     check_stopped_law_equality(p_h, part, compat.quotient, eta0, horizon);
    check("stopped projected law equals quotient law to horizon " + std::to_string(horizon), law_equal);

    report.all_passed = ok;
    report.text = os.str();
    return report;
}

}  // namespace sscycle
