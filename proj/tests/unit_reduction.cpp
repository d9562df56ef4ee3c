#include <doctest.h>

#include <random>
#include <set>

#include "teamci/errors.hpp"
#include "teamci/problem_io.hpp"
#include "teamci/solvers.hpp"
#include "test_support.hpp"

using namespace teamci;

namespace {

TeamProblem toy1() { return parse_problem(testing::fixture("toy1.json")); }

// prescription action: both agents copy the observation
PrescriptionAction copy_action(const TeamProblem& p) {
  PrescriptionAction lam;
  for (int i = 0; i < p.num_agents(); ++i) {
    std::vector<std::size_t> table(p.observation_space(i)->size());
    for (std::size_t y = 0; y < table.size(); ++y) table[y] = y;
    lam.parts.push_back(
        Kernel::deterministic(p.observation_space(i), p.action_space(i), table));
  }
  return lam;
}

// independent oracle for L: the naive joint sum over (y-tuple, u-tuple)
double naive_L(const TeamProblem& p, std::size_t x, std::size_t x0,
               const PrescriptionAction& lam) {
  const int n = p.num_agents();
  std::vector<std::size_t> ny(n), nu(n);
  for (int i = 0; i < n; ++i) {
    ny[i] = p.observation_space(i)->size();
    nu[i] = p.action_space(i)->size();
  }
  double total = 0.0;
  std::vector<std::size_t> y(n, 0);
  while (true) {
    std::vector<std::size_t> u(n, 0);
    while (true) {
      double term = 1.0;
      for (int i = 0; i < n; ++i) {
        term *= p.channel_q(i, y[i], x) * p.channel(i).reference.weight(y[i]);
        term *= lam.parts[i].row(y[i]).weight(u[i]);
      }
      total += term * p.cost_value(x, x0, y, u);
      int carry = n - 1;
      while (carry >= 0 && ++u[carry] == nu[carry]) u[carry--] = 0;
      if (carry < 0) break;
    }
    int carry = n - 1;
    while (carry >= 0 && ++y[carry] == ny[carry]) y[carry--] = 0;
    if (carry < 0) break;
  }
  return total;
}

}  // namespace

TEST_CASE("evaluate_L") {
  TeamProblem p = toy1();

  SUBCASE("constant cost integrates to the constant (channels normalized)") {
    TeamProblem k("k", p.state_space(), p.common_space(),
                  {p.observation_space(0), p.observation_space(1)},
                  {p.action_space(0), p.action_space(1)}, p.joint_law(),
                  {p.channel(0), p.channel(1)},
                  CostSpec::table(std::vector<double>(p.cost_table().size(), 2.5)));
    CHECK(evaluate_L(k, 0, 1, copy_action(k)) == doctest::Approx(2.5).epsilon(1e-12));
  }
  SUBCASE("degenerate channels collapse to a single cost lookup") {
    // channel putting all mass on y = x
    std::vector<ObservationChannel> channels;
    for (int i = 0; i < 2; ++i) {
      std::vector<double> q(4, 0.0);
      q[0 * 2 + 0] = 2.0;  // q(y,x) = 2 * 1{y==x} against uniform reference
      q[1 * 2 + 1] = 2.0;
      channels.push_back({i, Measure::uniform(p.observation_space(i)), q, "table", {}});
    }
    TeamProblem d("deg", p.state_space(), p.common_space(),
                  {p.observation_space(0), p.observation_space(1)},
                  {p.action_space(0), p.action_space(1)}, p.joint_law(), channels, p.cost());
    PrescriptionAction lam = copy_action(d);
    for (std::size_t x = 0; x < 2; ++x) {
      std::vector<std::size_t> y = {x, x}, u = {x, x};
      CHECK(evaluate_L(d, x, 0, lam) == doctest::Approx(d.cost_value(x, 0, y, u)));
    }
  }
  SUBCASE("toy1 copy prescription matches the joint-sum oracle") {
    PrescriptionAction lam = copy_action(p);
    for (std::size_t x = 0; x < 2; ++x)
      for (std::size_t x0 = 0; x0 < 2; ++x0)
        CHECK(evaluate_L(p, x, x0, lam) ==
              doctest::Approx(naive_L(p, x, x0, lam)).epsilon(1e-12));
  }
  SUBCASE("L is sandwiched by the cost envelope") {
    std::mt19937_64 rng(419);
    for (int trial = 0; trial < 20; ++trial) {
      TeamProblem q = testing::random_problem(rng);
      GridOptions options;
      auto grid = build_lambda_grid(q, options);
      std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
      double lo = q.min_cost(), hi = q.max_cost();
      for (int k = 0; k < 5; ++k) {
        double L = evaluate_L(q, 0, 0, grid[pick(rng)]);
        CHECK(L >= lo - 1e-12);
        CHECK(L <= hi + 1e-12);
      }
    }
  }
}

TEST_CASE("evaluate_M") {
  TeamProblem p = toy1();

  SUBCASE("diagonal joint law collapses the conditional expectation") {
    std::vector<double> law = {0.5, 0.0, 0.0, 0.5};
    TeamProblem d("diag", p.state_space(), p.common_space(),
                  {p.observation_space(0), p.observation_space(1)},
                  {p.action_space(0), p.action_space(1)}, law,
                  {p.channel(0), p.channel(1)}, p.cost());
    PrescriptionAction lam = copy_action(d);
    for (std::size_t x0 = 0; x0 < 2; ++x0)
      CHECK(evaluate_M(d, x0, lam) == doctest::Approx(evaluate_L(d, x0, x0, lam)));
  }
  SUBCASE("constant cost gives the constant") {
    TeamProblem k("k", p.state_space(), p.common_space(),
                  {p.observation_space(0), p.observation_space(1)},
                  {p.action_space(0), p.action_space(1)}, p.joint_law(),
                  {p.channel(0), p.channel(1)},
                  CostSpec::table(std::vector<double>(p.cost_table().size(), 0.75)));
    CHECK(evaluate_M(k, 0, copy_action(k)) == doctest::Approx(0.75).epsilon(1e-12));
  }
  SUBCASE("toy1 matches the posterior-weighted oracle at x0 = 0") {
    PrescriptionAction lam = copy_action(p);
    double oracle = 0.8 * naive_L(p, 0, 0, lam) + 0.2 * naive_L(p, 1, 0, lam);
    CHECK(evaluate_M(p, 0, lam) == doctest::Approx(oracle).epsilon(1e-12));
  }
  SUBCASE("zero-mass x0 refused") {
    std::vector<double> law = {0.6, 0.0, 0.4, 0.0};
    TeamProblem z("z", p.state_space(), p.common_space(),
                  {p.observation_space(0), p.observation_space(1)},
                  {p.action_space(0), p.action_space(1)}, law, {p.channel(0), p.channel(1)},
                  p.cost());
    CHECK_THROWS_AS(evaluate_M(z, 1, copy_action(z)), std::invalid_argument);
  }
}

TEST_CASE("build_lambda_grid") {
  TeamProblem p = toy1();

  SUBCASE("binary two-agent deterministic grid has 16 = 4 x 4 actions") {
    auto grid = build_lambda_grid(p, {});
    CHECK(grid.size() == 16);
  }
  SUBCASE("randomized r = 1 reproduces the deterministic grid") {
    auto det = build_lambda_grid(p, {});
    GridOptions r1{GridOptions::Mode::Randomized, 1, kDefaultEnumerationCap};
    auto rand1 = build_lambda_grid(p, r1);
    REQUIRE(det.size() == rand1.size());
    for (std::size_t j = 0; j < det.size(); ++j)
      for (int i = 0; i < 2; ++i)
        for (std::size_t y = 0; y < 2; ++y)
          CHECK(det[j].parts[i].row(y).weights() == rand1[j].parts[i].row(y).weights());
  }
  SUBCASE("single-observation binary lattice r = 2 has rows (1,0), (1/2,1/2), (0,1)") {
    SpacePtr one = FiniteSpace::indexed("one", 1);
    SpacePtr u = FiniteSpace::indexed("u", 2);
    ObservationChannel ch{0, Measure::uniform(one), {1.0}, "table", {}};
    TeamProblem single("single", one, one, {one}, {u}, {1.0}, {ch},
                       CostSpec::table(std::vector<double>(2, 0.0)));
    GridOptions r2{GridOptions::Mode::Randomized, 2, kDefaultEnumerationCap};
    auto grid = build_lambda_grid(single, r2);
    REQUIRE(grid.size() == 3);
    CHECK(grid[0].parts[0].row(0).weights() == std::vector<double>{1.0, 0.0});
    CHECK(grid[1].parts[0].row(0).weights() == std::vector<double>{0.5, 0.5});
    CHECK(grid[2].parts[0].row(0).weights() == std::vector<double>{0.0, 1.0});
  }
  SUBCASE("grids are duplicate-free") {
    GridOptions r2{GridOptions::Mode::Randomized, 2, kDefaultEnumerationCap};
    auto grid = build_lambda_grid(p, r2);
    for (std::size_t a = 0; a < grid.size(); ++a)
      for (std::size_t b = a + 1; b < grid.size(); ++b) {
        bool equal = true;
        for (int i = 0; i < 2 && equal; ++i)
          for (std::size_t y = 0; y < 2 && equal; ++y)
            equal = grid[a].parts[i].row(y).weights() == grid[b].parts[i].row(y).weights();
        CHECK_FALSE(equal);
      }
  }
  SUBCASE("lattice rows at resolution r enumerate the whole simplex lattice") {
    // one agent, |Y| = 1, |U| = 4, r = 3: C(6,3) = 20 rows, all distinct,
    // each with weights k/3 summing to 1, corners included
    SpacePtr one = FiniteSpace::indexed("one", 1);
    SpacePtr u4 = FiniteSpace::indexed("u", 4);
    ObservationChannel ch{0, Measure::uniform(one), {1.0}, "table", {}};
    TeamProblem single("single", one, one, {one}, {u4}, {1.0}, {ch},
                       CostSpec::table(std::vector<double>(4, 0.0)));
    GridOptions r3{GridOptions::Mode::Randomized, 3, kDefaultEnumerationCap};
    auto grid = build_lambda_grid(single, r3);
    REQUIRE(grid.size() == 20);
    std::set<std::vector<double>> seen;
    std::size_t corners = 0;
    for (const auto& lam : grid) {
      const auto& w = lam.parts[0].row(0).weights();
      double sum = 0.0;
      for (double v : w) {
        sum += v;
        CHECK(std::abs(v * 3.0 - std::round(v * 3.0)) <= 1e-15);  // lattice point
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
      seen.insert(w);
      if (lam.parts[0].row(0).point_support()) ++corners;
    }
    CHECK(seen.size() == 20);
    CHECK(corners == 4);
  }
  SUBCASE("cap refusal carries the count") {
    GridOptions small;
    small.cap = 10;
    CHECK_THROWS_AS(build_lambda_grid(p, small), CapExceeded);
  }
}

TEST_CASE("reduce and solve_centralized") {
  TeamProblem p = toy1();

  SUBCASE("single-atom common space gives a single-row table") {
    SpacePtr one = FiniteSpace::indexed("one", 1);
    std::vector<double> law = {0.5, 0.5};  // 2 states x 1 common atom
    TeamProblem flat("flat", p.state_space(), one,
                     {p.observation_space(0), p.observation_space(1)},
                     {p.action_space(0), p.action_space(1)}, law,
                     {p.channel(0), p.channel(1)}, CostSpec::mismatch({1.0, 1.0}, 1.0));
    auto cp = reduce(flat, build_lambda_grid(flat, {}));
    CHECK(cp.common_space->size() == 1);
    CHECK(cp.grid.size() == 16);
    CHECK(cp.m_table.size() == 16);
  }
  SUBCASE("zero cost gives a zero table") {
    TeamProblem zero("zero", p.state_space(), p.common_space(),
                     {p.observation_space(0), p.observation_space(1)},
                     {p.action_space(0), p.action_space(1)}, p.joint_law(),
                     {p.channel(0), p.channel(1)},
                     CostSpec::table(std::vector<double>(p.cost_table().size(), 0.0)));
    auto cp = reduce(zero, build_lambda_grid(zero, {}));
    for (double m : cp.m_table) CHECK(m == 0.0);
  }
  SUBCASE("toy1: 2 x 16 table, entries cross-checked against induced profiles") {
    auto cp = reduce(p, build_lambda_grid(p, {}));
    REQUIRE(cp.m_table.size() == 32);
    // For each grid element, the constant prescription's J must equal the
    // mu0-weighted row mix of M values.
    for (std::size_t j = 0; j < cp.grid.size(); ++j) {
      Prescription constant;
      constant.action_index = {static_cast<std::int64_t>(j), static_cast<std::int64_t>(j)};
      PolicyProfile lifted = lift(p, cp, constant);
      double mixed = 0.0;
      for (std::size_t x0 = 0; x0 < 2; ++x0)
        mixed += p.common_marginal().weight(x0) * cp.m(x0, j);
      CHECK(expected_cost(p, lifted) == doctest::Approx(mixed).epsilon(1e-12));
    }
  }
  SUBCASE("reduce equals reduce_serial bitwise") {
    auto grid = build_lambda_grid(p, {});
    auto cp_par = reduce(p, grid);
    auto cp_ser = reduce_serial(p, grid);
    CHECK(cp_par.m_table == cp_ser.m_table);
  }
  SUBCASE("solve_centralized: single element, dominance, empty grid") {
    auto grid = build_lambda_grid(p, {});
    std::vector<PrescriptionAction> one = {grid[3]};
    auto cp1 = reduce(p, one);
    auto [pres1, value1] = solve_centralized(cp1);
    CHECK(pres1.action_index == std::vector<std::int64_t>{0, 0});
    double expect = 0.0;
    for (std::size_t x0 = 0; x0 < 2; ++x0)
      expect += p.common_marginal().weight(x0) * cp1.m(x0, 0);
    CHECK(value1 == expect);

    // a rowwise-dominating column is selected everywhere
    CentralizedProblem dom;
    dom.common_space = p.common_space();
    dom.grid = {grid[0], grid[1]};
    dom.m_table = {5.0, 1.0, 7.0, 2.0};
    dom.row_active = {true, true};
    dom.common_weights = {0.5, 0.5};
    auto [presd, valued] = solve_centralized(dom);
    CHECK(presd.action_index == std::vector<std::int64_t>{1, 1});
    CHECK(valued == doctest::Approx(1.5));

    CentralizedProblem empty;
    empty.common_space = p.common_space();
    CHECK_THROWS_AS(solve_centralized(empty), std::invalid_argument);
  }
}

TEST_CASE("lift") {
  TeamProblem p = toy1();
  auto cp = reduce(p, build_lambda_grid(p, {}));

  SUBCASE("constant prescription ignores x0") {
    Prescription constant;
    constant.action_index = {5, 5};
    PolicyProfile lifted = lift(p, cp, constant);
    for (int i = 0; i < 2; ++i)
      for (std::size_t y = 0; y < 2; ++y)
        CHECK(lifted.part(i).row(0 * 2 + y).weights() ==
              lifted.part(i).row(1 * 2 + y).weights());
  }
  SUBCASE("toy1 optimal prescription round-trips to the centralized value") {
    auto [pres, value] = solve_centralized(cp);
    PolicyProfile lifted = lift(p, cp, pres);
    CHECK(expected_cost(p, lifted) == doctest::Approx(value).epsilon(1e-12));
  }
  SUBCASE("degenerate common space: lift is the identity embedding") {
    SpacePtr one = FiniteSpace::indexed("one", 1);
    TeamProblem flat("flat", p.state_space(), one,
                     {p.observation_space(0), p.observation_space(1)},
                     {p.action_space(0), p.action_space(1)}, {0.5, 0.5},
                     {p.channel(0), p.channel(1)}, CostSpec::mismatch({1.0, 1.0}, 1.0));
    auto cpf = reduce(flat, build_lambda_grid(flat, {}));
    for (std::size_t j = 0; j < cpf.grid.size(); ++j) {
      Prescription pres;
      pres.action_index = {static_cast<std::int64_t>(j)};
      PolicyProfile lifted = lift(flat, cpf, pres);
      for (int i = 0; i < 2; ++i)
        for (std::size_t y = 0; y < 2; ++y)
          CHECK(lifted.part(i).row(y).weights() == cpf.grid[j].parts[i].row(y).weights());
    }
  }
  SUBCASE("missing assignment on a positive-mass atom refused") {
    Prescription partial;
    partial.action_index = {0, Prescription::kUnassigned};
    CHECK_THROWS_AS(lift(p, cp, partial), std::invalid_argument);
  }
}

TEST_CASE("reduction consistency on random instances") {
  std::mt19937_64 rng(523);
  for (int trial = 0; trial < 15; ++trial) {
    TeamProblem p = testing::random_problem(rng, {2, 2, 2, 2});
    auto grid = build_lambda_grid(p, {});
    auto cp = reduce(p, grid);

    // any grid-expressible profile: J(gamma) = sum_x0 mu0(x0) M(x0, lambda_gamma(x0))
    std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
    Prescription pres;
    for (std::size_t x0 = 0; x0 < p.common_space()->size(); ++x0)
      pres.action_index.push_back(static_cast<std::int64_t>(pick(rng)));
    PolicyProfile gamma = lift(p, cp, pres);
    double mixed = 0.0;
    for (std::size_t x0 = 0; x0 < p.common_space()->size(); ++x0)
      mixed += p.common_marginal().weight(x0) *
               cp.m(x0, static_cast<std::size_t>(pres.action_index[x0]));
    CHECK(expected_cost(p, gamma) == doctest::Approx(mixed).epsilon(1e-12));

    // restriction of the lifted profile recovers the prescribed actions
    for (std::size_t x0 = 0; x0 < p.common_space()->size(); ++x0) {
      PrescriptionAction back = restrict_profile(p, gamma, x0);
      double m_back = evaluate_M(p, x0, back);
      CHECK(m_back ==
            doctest::Approx(cp.m(x0, static_cast<std::size_t>(pres.action_index[x0])))
                .epsilon(1e-12));
    }
  }
}

TEST_CASE("grid refinement never increases the centralized value") {
  std::mt19937_64 rng(617);
  for (int trial = 0; trial < 10; ++trial) {
    TeamProblem p = testing::random_problem(rng, {2, 2, 2, 2});
    GridOptions det;
    GridOptions lat{GridOptions::Mode::Randomized, 2, kDefaultEnumerationCap};
    auto value_of = [&](const GridOptions& o) {
      auto cp = reduce(p, build_lambda_grid(p, o));
      return solve_centralized(cp).second;
    };
    double v_det = value_of(det);
    double v_lat = value_of(lat);
    CHECK(v_lat <= v_det + 1e-12);  // lattice contains the corners
  }
}
