#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sscycle/errors.hpp"

namespace sscycle {

// Sites of the n-cycle are 0..n-1 with indices increasing counterclockwise,
// so the clockwise neighbor of x is x-1 (mod n) and the counterclockwise
// neighbor is x+1 (mod n). n >= 2.
inline int cw_neighbor(int x, int n) { return (x + n - 1) % n; }
inline int ccw_neighbor(int x, int n) { return (x + 1) % n; }

// One value of the ordered set N_s = {0, s, 1, 2, ...} with 0 < s < 1 < 2 < ...
// s is a single sleeping particle; an integer k is k active particles.
class NsValue {
public:
    constexpr NsValue() : raw_(0) {}

    static constexpr NsValue active(int k) { return NsValue(k); }
    static constexpr NsValue sleeper() { return NsValue(-1); }

    constexpr bool is_sleeper() const { return raw_ < 0; }
    constexpr int active_count() const { return raw_ < 0 ? 0 : raw_; }
    // |v|: particle count regardless of state, |s| = 1.
    constexpr int magnitude() const { return raw_ < 0 ? 1 : raw_; }

    friend constexpr bool operator==(NsValue a, NsValue b) { return a.raw_ == b.raw_; }
    friend constexpr bool operator<(NsValue a, NsValue b) { return a.rank() < b.rank(); }
    friend constexpr bool operator<=(NsValue a, NsValue b) { return a.rank() <= b.rank(); }

private:
    explicit constexpr NsValue(int raw) : raw_(raw) {}
    // total order 0 < s < 1 < 2 < ...
    constexpr int rank() const { return raw_ < 0 ? 1 : (raw_ == 0 ? 0 : raw_ + 1); }
    int raw_;
};

enum class NsAction { TimesSleep, PlusOne, MinusOne, PlusSleep };

// The N_s algebra. TimesSleep: 1*s = s, k*s = k (k >= 2). PlusOne: s + 1 = 2
// (an arriving particle wakes the sleeper), k + 1 = k + 1. MinusOne: k - 1
// for k >= 1; undefined on s and 0. PlusSleep: k + s = k + 1 for k >= 1.
NsValue ns_apply(NsValue v, NsAction action);

// SS configuration: per-site particle counts on Z_n summing to n.
struct SandpileConfig {
    std::vector<int> counts;

    int size() const { return static_cast<int>(counts.size()); }
    long long total() const;
    // stable iff every site holds at most one particle
    bool is_stable() const;

    static SandpileConfig point(int n);     // all n particles on site 0
    static SandpileConfig all_ones(int n);  // the unique stable state

    friend bool operator==(const SandpileConfig&, const SandpileConfig&) = default;
};

// ARW configuration: per-site N_s values with particle magnitudes summing to n.
struct ArwConfig {
    std::vector<NsValue> values;

    int size() const { return static_cast<int>(values.size()); }
    long long total() const;
    // ARW-stable iff every site holds exactly one sleeping particle
    bool is_stable() const;

    static ArwConfig point(int n);         // n active particles on site 0
    static ArwConfig all_sleeping(int n);  // the unique ARW-stable state
    static ArwConfig all_active(int n);    // one active particle per site

    friend bool operator==(const ArwConfig&, const ArwConfig&) = default;
};

// Result of one SS toppling: (rho_-, rho_+) = particles stepping clockwise /
// counterclockwise. Six values: (0,0),(1,0),(0,1),(1,1),(2,0),(0,2).
struct SsOutcome {
    int rho_minus = 0;
    int rho_plus = 0;
    friend bool operator==(SsOutcome, SsOutcome) = default;
};

enum class ArwInstruction { Sleep, StepClockwise, StepCounterclockwise };

// Topple unstable site x (counts[x] >= 2). (0,0) is a legal null toppling.
void apply_ss_topple_inplace(SandpileConfig& s, int x, SsOutcome out);
SandpileConfig apply_ss_topple(SandpileConfig s, int x, SsOutcome out);

// Topple site x holding at least one active particle. Sleep succeeds only
// when the particle is alone; a step wakes any sleeper at the destination.
void apply_arw_topple_inplace(ArwConfig& eta, int x, ArwInstruction instr);
ArwConfig apply_arw_topple(ArwConfig eta, int x, ArwInstruction instr);

// Forget particle states: counts[x] = |values[x]|.
SandpileConfig project(const ArwConfig& eta);

struct Classification {
    std::optional<int> min_two_site;     // least x with particle count >= 2
    std::optional<int> min_active_site;  // least x with an active particle (ARW)
    bool ss_stable = false;
    bool arw_stable = false;
    bool counts_all_ones = false;  // membership in the cell H_{-1}
};

Classification classify(const SandpileConfig& s);
Classification classify(const ArwConfig& eta);

// Canonical text rendering: comma-separated site values, `s` for a sleeper,
// e.g. "2,0,s". Parsing accepts the same grammar.
std::string to_text(const SandpileConfig& s);
std::string to_text(const ArwConfig& eta);
std::string to_text(SsOutcome out);
std::string to_text(ArwInstruction instr);
SandpileConfig parse_sandpile(const std::string& text);
ArwConfig parse_arw(const std::string& text);

}  // namespace sscycle
