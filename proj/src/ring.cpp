#include "sscycle/ring.hpp"

#include <numeric>
#include <sstream>

namespace sscycle {

NsValue ns_apply(NsValue v, NsAction action) {
    switch (action) {
        case NsAction::TimesSleep:
            // 1*s = s, k*s = k for k >= 2; undefined on 0 and s
            if (v.is_sleeper() || v.active_count() == 0)
                throw UndefinedOperationError("times_sleep requires an active particle");
            return v.active_count() == 1 ? NsValue::sleeper() : v;
        case NsAction::PlusOne:
            // s + 1 = 1 + s = 2: the arrival wakes the sleeper
            if (v.is_sleeper()) return NsValue::active(2);
            return NsValue::active(v.active_count() + 1);
        case NsAction::MinusOne:
            // s - 1 is not defined: a sleeper never steps out
            if (v.is_sleeper() || v.active_count() < 1)
                throw UndefinedOperationError("minus_one requires |v| >= 1 active");
            return NsValue::active(v.active_count() - 1);
        case NsAction::PlusSleep:
            // k + s = k + 1 for k >= 1
            if (v.is_sleeper() || v.active_count() < 1)
                throw UndefinedOperationError("plus_sleep requires an integer k >= 1");
            return NsValue::active(v.active_count() + 1);
    }
    throw UndefinedOperationError("unknown action");
}

long long SandpileConfig::total() const {
    return std::accumulate(counts.begin(), counts.end(), 0LL);
}

bool SandpileConfig::is_stable() const {
    for (int c : counts)
        if (c >= 2) return false;
    return true;
}

SandpileConfig SandpileConfig::point(int n) {
    SandpileConfig s;
    s.counts.assign(n, 0);
    s.counts[0] = n;
    return s;
}

SandpileConfig SandpileConfig::all_ones(int n) {
    SandpileConfig s;
    s.counts.assign(n, 1);
    return s;
}

long long ArwConfig::total() const {
    long long t = 0;
    for (NsValue v : values) t += v.magnitude();
    return t;
}

bool ArwConfig::is_stable() const {
    for (NsValue v : values)
        if (!v.is_sleeper()) return false;
    return true;
}

ArwConfig ArwConfig::point(int n) {
    ArwConfig eta;
    eta.values.assign(n, NsValue::active(0));
    eta.values[0] = NsValue::active(n);
    return eta;
}

ArwConfig ArwConfig::all_sleeping(int n) {
    ArwConfig eta;
    eta.values.assign(n, NsValue::sleeper());
    return eta;
}

ArwConfig ArwConfig::all_active(int n) {
    ArwConfig eta;
    eta.values.assign(n, NsValue::active(1));
    return eta;
}

void apply_ss_topple_inplace(SandpileConfig& s, int x, SsOutcome out) {
    const int n = s.size();
    if (s.counts[x] < 2) throw IllegalToppleError("SS toppling at stable site " + std::to_string(x));
    if (out.rho_minus < 0 || out.rho_plus < 0 || out.rho_minus + out.rho_plus > 2)
        throw UndefinedOperationError("invalid SS outcome");
    s.counts[x] -= out.rho_minus + out.rho_plus;
    s.counts[cw_neighbor(x, n)] += out.rho_minus;
    s.counts[ccw_neighbor(x, n)] += out.rho_plus;
}

SandpileConfig apply_ss_topple(SandpileConfig s, int x, SsOutcome out) {
    apply_ss_topple_inplace(s, x, out);
    return s;
}

void apply_arw_topple_inplace(ArwConfig& eta, int x, ArwInstruction instr) {
    const int n = eta.size();
    if (eta.values[x].active_count() < 1)
        throw IllegalToppleError("ARW toppling at site " + std::to_string(x) + " with no active particle");
    switch (instr) {
        case ArwInstruction::Sleep:
            // succeeds only when the particle is alone; otherwise a no-op
            eta.values[x] = ns_apply(eta.values[x], NsAction::TimesSleep);
            break;
        case ArwInstruction::StepClockwise: {
            int d = cw_neighbor(x, n);
            eta.values[x] = ns_apply(eta.values[x], NsAction::MinusOne);
            eta.values[d] = ns_apply(eta.values[d], NsAction::PlusOne);
            break;
        }
        case ArwInstruction::StepCounterclockwise: {
            int d = ccw_neighbor(x, n);
            eta.values[x] = ns_apply(eta.values[x], NsAction::MinusOne);
            eta.values[d] = ns_apply(eta.values[d], NsAction::PlusOne);
            break;
        }
    }
}

ArwConfig apply_arw_topple(ArwConfig eta, int x, ArwInstruction instr) {
    apply_arw_topple_inplace(eta, x, instr);
    return eta;
}

SandpileConfig project(const ArwConfig& eta) {
    SandpileConfig s;
    s.counts.reserve(eta.size());
    for (NsValue v : eta.values) s.counts.push_back(v.magnitude());
    return s;
}

Classification classify(const SandpileConfig& s) {
    Classification c;
    c.counts_all_ones = true;
    for (int x = 0; x < s.size(); ++x) {
        if (s.counts[x] >= 2 && !c.min_two_site) c.min_two_site = x;
        if (s.counts[x] != 1) c.counts_all_ones = false;
    }
    c.ss_stable = !c.min_two_site.has_value();
    return c;
}

Classification classify(const ArwConfig& eta) {
    Classification c;
    c.counts_all_ones = true;
    for (int x = 0; x < eta.size(); ++x) {
        NsValue v = eta.values[x];
        if (v.magnitude() >= 2 && !c.min_two_site) c.min_two_site = x;
        if (v.active_count() >= 1 && !c.min_active_site) c.min_active_site = x;
        if (v.magnitude() != 1) c.counts_all_ones = false;
    }
    c.ss_stable = !c.min_two_site.has_value();
    c.arw_stable = !c.min_active_site.has_value();
    return c;
}

std::string to_text(const SandpileConfig& s) {
    std::string out;
    for (int x = 0; x < s.size(); ++x) {
        if (x) out += ',';
        out += std::to_string(s.counts[x]);
    }
    return out;
}

std::string to_text(const ArwConfig& eta) {
    std::string out;
    for (int x = 0; x < eta.size(); ++x) {
        if (x) out += ',';
        NsValue v = eta.values[x];
        out += v.is_sleeper() ? "s" : std::to_string(v.active_count());
    }
    return out;
}

std::string to_text(SsOutcome out) {
    return "(" + std::to_string(out.rho_minus) + ";" + std::to_string(out.rho_plus) + ")";
}

std::string to_text(ArwInstruction instr) {
    switch (instr) {
        case ArwInstruction::Sleep: return "sleep";
        case ArwInstruction::StepClockwise: return "cw";
        case ArwInstruction::StepCounterclockwise: return "ccw";
    }
    return "?";
}

namespace {

std::vector<std::string> split_commas(const std::string& text) {
    std::vector<std::string> tokens;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) tokens.push_back(tok);
    return tokens;
}

int parse_count(const std::string& tok) {
    if (tok.empty()) throw InvalidSpecError("empty site token");
    for (char ch : tok)
        if (ch < '0' || ch > '9') throw InvalidSpecError("bad site token '" + tok + "'");
    return std::stoi(tok);
}

}  // namespace

SandpileConfig parse_sandpile(const std::string& text) {
    SandpileConfig s;
    for (const auto& tok : split_commas(text)) s.counts.push_back(parse_count(tok));
    if (s.size() < 2) throw InvalidSpecError("configuration needs at least 2 sites");
    return s;
}

ArwConfig parse_arw(const std::string& text) {
    ArwConfig eta;
    for (const auto& tok : split_commas(text)) {
        if (tok == "s")
            eta.values.push_back(NsValue::sleeper());
        else
            eta.values.push_back(NsValue::active(parse_count(tok)));
    }
    if (eta.size() < 2) throw InvalidSpecError("configuration needs at least 2 sites");
    return eta;
}

}  // namespace sscycle
