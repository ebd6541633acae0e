#include <doctest.h>

#include <array>
#include <cmath>

#include "pioham/grid.hpp"

using namespace pioham;

TEST_CASE("build_grid basics") {
  const Grid g = build_grid(10.0, 801);
  CHECK(g.h == doctest::Approx(0.0125).epsilon(1e-14));
  CHECK(g.nodes(800) == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(g.nodes(0) == 0.0);

  const Grid g2 = build_grid(8.0, 401);
  CHECK(g2.h == doctest::Approx(0.02).epsilon(1e-14));
  CHECK(g2.nodes(100) == doctest::Approx(2.0).epsilon(1e-14));

  CHECK_THROWS_AS(build_grid(10.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(0.0, 100), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(-1.0, 100), std::invalid_argument);
}

TEST_CASE("D1 exact on polynomials up to degree 2 at every node") {
  const Grid g = build_grid(5.0, 51);
  const DiscreteOperator d1 = build_d1(g);

  const Vector c = Vector::Constant(g.n, 3.7);
  CHECK(d1.apply(c).lpNorm<Eigen::Infinity>() < 1e-12);

  const Vector lin = d1.apply(g.nodes);
  CHECK((lin - Vector::Ones(g.n)).lpNorm<Eigen::Infinity>() < 1e-12);

  const Vector sq = g.nodes.array().square();
  const Vector dsq = d1.apply(sq);
  const Vector expect = 2.0 * g.nodes;
  CHECK((dsq - expect).lpNorm<Eigen::Infinity>() < 1e-12 * g.eta_max * 2.0);
}

TEST_CASE("D2 exact on polynomials up to degree 2, cubic quirk at node 0") {
  const Grid g = build_grid(5.0, 51);
  const DiscreteOperator d2 = build_d2(g);

  CHECK(d2.apply(g.nodes).lpNorm<Eigen::Infinity>() < 1e-11);

  const Vector sq = g.nodes.array().square();
  const Vector dsq = d2.apply(sq);
  CHECK((dsq - Vector::Constant(g.n, 2.0)).lpNorm<Eigen::Infinity>() < 1e-11);

  // 4-point one-sided stencil on eta^3 evaluates to 0 at node 0 (the true value).
  const Vector cube = g.nodes.array().cube();
  CHECK(std::abs(d2.apply(cube)(0)) < 1e-9);
}

TEST_CASE("D3 is the product D1*D2 and exact on cubics in the interior") {
  const Grid g = build_grid(5.0, 51);
  const DiscreteOperator d1 = build_d1(g);
  const DiscreteOperator d2 = build_d2(g);
  const DiscreteOperator d3 = build_d3(d1, d2);

  CHECK((d3.entries - d1.entries * d2.entries).lpNorm<Eigen::Infinity>() == 0.0);

  const Vector sq = g.nodes.array().square();
  CHECK(d3.apply(sq).lpNorm<Eigen::Infinity>() < 1e-10);

  const Vector cube = g.nodes.array().cube();
  const Vector dcube = d3.apply(cube);
  for (Index i = 2; i <= g.n - 3; ++i) {
    CHECK(dcube(i) == doctest::Approx(6.0).epsilon(1e-10));
  }

  // band widths
  for (Index i = 0; i < g.n; ++i) {
    CHECK((d1.entries.row(i).array() != 0.0).count() <= 4);
    CHECK((d2.entries.row(i).array() != 0.0).count() <= 4);
    CHECK((d3.entries.row(i).array() != 0.0).count() <= 7);
  }
}

static double interior_error(const DiscreteOperator& op, const Vector& f,
                             const Vector& exact) {
  const Vector err = op.apply(f) - exact;
  return err.segment(2, err.size() - 4).lpNorm<Eigen::Infinity>();
}

TEST_CASE("second-order convergence under grid refinement") {
  auto errors = [](Index n) {
    const Grid g = build_grid(4.0, n);
    const DiscreteOperator d1 = build_d1(g);
    const DiscreteOperator d2 = build_d2(g);
    const DiscreteOperator d3 = build_d3(d1, d2);
    const Vector s = g.nodes.array().sin();
    const Vector c = g.nodes.array().cos();
    return std::array<double, 3>{interior_error(d1, s, c),
                                 interior_error(d2, s, Vector(-s)),
                                 interior_error(d3, s, Vector(-c))};
  };
  const auto coarse = errors(101);
  const auto fine = errors(201);
  for (int k = 0; k < 3; ++k) {
    CHECK(coarse[k] / fine[k] >= 3.5);  // nominal factor 4 when h halves
  }
}

TEST_CASE("third derivative of exp(-eta) converges at second order") {
  auto err = [](Index n) {
    const Grid g = build_grid(4.0, n);
    const Vector f = (-g.nodes.array()).exp();
    const Vector exact = -f;
    return interior_error(build_d3(g), f, exact);
  };
  const double e1 = err(101);
  const double e2 = err(201);
  CHECK(e1 < 1e-2);
  CHECK(e1 / e2 >= 3.5);
}

TEST_CASE("operators are linear") {
  const Grid g = build_grid(3.0, 31);
  const DiscreteOperator d3 = build_d3(g);
  const Vector u = g.nodes.array().sin();
  const Vector v = (0.5 * g.nodes.array()).exp();
  const Vector lhs = d3.apply(2.5 * u - 1.25 * v);
  const Vector rhs = 2.5 * d3.apply(u) - 1.25 * d3.apply(v);
  CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() < 1e-10);
}
