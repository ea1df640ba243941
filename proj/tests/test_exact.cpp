#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sscycle/exact.hpp"

using namespace sscycle;

namespace {

// brute-force oracle for the n = 3 ARW state count: every function
// Z_3 -> {0,1,2,3,s} with particle magnitudes summing to 3
int brute_force_arw_count_n3() {
    int count = 0;
    for (int a = -1; a <= 3; ++a)
        for (int b = -1; b <= 3; ++b)
            for (int c = -1; c <= 3; ++c) {
                auto mag = [](int v) { return v == -1 ? 1 : v; };
                if (mag(a) + mag(b) + mag(c) == 3) ++count;
            }
    return count;
}

}  // namespace

TEST_CASE("rational parsing") {
    CHECK(parse_rational("7/3") == Rational(7) / 3);
    CHECK(parse_rational("2") == Rational(2));
    CHECK_THROWS_AS(parse_rational("1/0"), InvalidSpecError);
    CHECK_THROWS_AS(parse_rational("abc"), InvalidSpecError);
}

TEST_CASE("state-space counts at n = 3") {
    auto ss = enumerate_ss_states(3);
    CHECK(ss.states.size() == 10);  // C(5,2)
    auto arw = enumerate_arw_states(3);
    CHECK(static_cast<int>(arw.states.size()) == brute_force_arw_count_n3());
    CHECK(arw.states.size() == 23);

    auto part = project_partition(arw, ss);
    CHECK(part.members[part.special_cell].size() == 8);  // 2^3 sleep/active choices

    CHECK_THROWS_AS(enumerate_ss_states(9), SizeGuardError);
    CHECK_THROWS_AS(enumerate_arw_states(1), SizeGuardError);
}

TEST_CASE("SS matrix row for (2,1,0) at p = 1/2") {
    auto ss = enumerate_ss_states(3);
    Matrix m = build_ss_matrix(ss, Rational(1) / 2);
    CHECK(is_row_stochastic(m));

    int from = ss.index_of(parse_sandpile("2,1,0"));
    // toppling site 0: clockwise neighbor is site 2, counterclockwise site 1
    CHECK(m[from][ss.index_of(parse_sandpile("2,1,0"))] == Rational(1) / 4);  // null
    CHECK(m[from][ss.index_of(parse_sandpile("1,1,1"))] == Rational(1) / 4);  // (1,0)
    CHECK(m[from][ss.index_of(parse_sandpile("1,2,0"))] == Rational(1) / 4);  // (0,1)
    CHECK(m[from][ss.index_of(parse_sandpile("0,2,1"))] == Rational(1) / 8);  // (1,1)
    CHECK(m[from][ss.index_of(parse_sandpile("0,1,2"))] == Rational(1) / 16); // (2,0)
    CHECK(m[from][ss.index_of(parse_sandpile("0,3,0"))] == Rational(1) / 16); // (0,2)

    // the all-ones state is the unique absorbing state
    int stable = ss.index_of(SandpileConfig::all_ones(3));
    for (std::size_t i = 0; i < m.size(); ++i)
        CHECK((m[i][i] == 1) == (static_cast<int>(i) == stable));
}

TEST_CASE("ARW chain rows at a 2-site aggregate to the six pair probabilities") {
    const Rational lambda(2);
    auto arw = enumerate_arw_states(3);
    auto ss = enumerate_ss_states(3);
    auto part = project_partition(arw, ss);
    Matrix m = build_arw_chain_matrix(arw, lambda);
    CHECK(is_row_stochastic(m));

    // algebraic identity: the six probabilities sum to (1+lambda)^2 / (1+lambda)^2
    Rational denom = (1 + lambda) * (1 + lambda);
    Rational sum = lambda * lambda + lambda + lambda + Rational(1) / 2 + Rational(1) / 4 + Rational(1) / 4;
    CHECK(sum == denom);

    int from = arw.index_of(parse_arw("2,0,s"));
    auto prob_to_cell = [&](const std::string& text) {
        Rational total(0);
        const SandpileConfig target = parse_sandpile(text);
        for (std::size_t j = 0; j < m[from].size(); ++j)
            if (project(arw.states[j]) == target) total += m[from][j];
        return total;
    };
    CHECK(prob_to_cell("2,0,1") == lambda * lambda / denom);                       // (0,0)
    CHECK(prob_to_cell("1,0,2") == lambda / denom);                                // (1,0): cw to site 2
    CHECK(prob_to_cell("1,1,1") == lambda / denom);                                // (0,1)
    CHECK(prob_to_cell("0,1,2") == Rational(1) / 2 / denom);                       // (1,1)
    CHECK(prob_to_cell("0,0,3") == Rational(1) / 4 / denom);                       // (2,0)
    CHECK(prob_to_cell("0,2,1") == Rational(1) / 4 / denom);                       // (0,2)
}

TEST_CASE("lumpability and quotient-equals-SS at n = 3, lambda = 1") {
    auto arw = enumerate_arw_states(3);
    auto ss = enumerate_ss_states(3);
    auto part = project_partition(arw, ss);
    Matrix p_h = build_arw_chain_matrix(arw, Rational(1));
    auto compat = check_markov_compatibility(p_h, part);
    CHECK(compat.compatible);
    CHECK_FALSE(compat.counterexample.has_value());

    // the special cell's quotient row is the identity row
    for (std::size_t j = 0; j < compat.quotient.size(); ++j)
        CHECK(compat.quotient[part.special_cell][j] ==
              (static_cast<int>(j) == part.special_cell ? 1 : 0));

    // quotient equals the SS matrix with p = 1/2, entrywise
    Matrix p_s = build_ss_matrix(ss, Rational(1) / 2);
    for (std::size_t i = 0; i < compat.quotient.size(); ++i)
        for (std::size_t j = 0; j < compat.quotient.size(); ++j)
            CHECK(compat.quotient[i][j] == p_s[part.ss_state_of_cell[i]][part.ss_state_of_cell[j]]);
}

TEST_CASE("stopped projected law equals quotient law; perturbation is caught") {
    auto arw = enumerate_arw_states(3);
    auto ss = enumerate_ss_states(3);
    auto part = project_partition(arw, ss);
    Matrix p_h = build_arw_chain_matrix(arw, Rational(1));
    auto compat = check_markov_compatibility(p_h, part);
    REQUIRE(compat.compatible);

    int eta0 = arw.index_of(parse_arw("3,0,0"));
    CHECK(check_stopped_law_equality(p_h, part, compat.quotient, eta0, 50));

    // negative control: deliberately mis-aggregating one cell must fail
    // the all-active member of H_{-1} receives mass, so misplacing it shows
    Partition broken = part;
    int a = broken.members[broken.special_cell].front();
    broken.members[broken.special_cell].erase(broken.members[broken.special_cell].begin());
    int other_cell = broken.special_cell == 0 ? 1 : 0;
    broken.members[other_cell].push_back(a);
    broken.cell_of[a] = other_cell;
    CHECK_FALSE(check_stopped_law_equality(p_h, broken, compat.quotient, eta0, 50));
}

TEST_CASE("absorption-time law") {
    auto ss = enumerate_ss_states(3);
    Matrix p_s = build_ss_matrix(ss, Rational(1) / 2);
    int stable = ss.index_of(SandpileConfig::all_ones(3));

    // start absorbing: Pr[T = 0] = 1
    auto at_stable = absorption_distribution(p_s, {stable}, stable, 5);
    CHECK(at_stable.pmf[0] == 1);
    CHECK(at_stable.tail == 0);

    // from (3,0,0) only the (1,1) outcome reaches all-ones in one step
    int start = ss.index_of(parse_sandpile("3,0,0"));
    auto law = absorption_distribution(p_s, {stable}, start, 200);
    CHECK(law.pmf[0] == 0);
    CHECK(law.pmf[1] == Rational(1) / 8);
    Rational mass(0);
    for (const auto& v : law.pmf) {
        CHECK(v >= 0);
        mass += v;
    }
    CHECK(mass + law.tail == 1);
    CHECK(law.tail < Rational(1) / 1000000);

    CHECK_THROWS_AS(absorption_distribution(p_s, {start}, start, 5), InvalidSpecError);
}

TEST_CASE("full verification suite at n = 3, lambda = 7/3") {
    auto report = run_verification(3, Rational(7) / 3);
    INFO(report.text);
    CHECK(report.all_passed);
}
