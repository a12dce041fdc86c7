#include "commfield/experiments.hpp"
#include "commfield/transform.hpp"

#include <doctest.h>

#include <random>

using namespace commfield;

namespace {

const ParameterSample kUnit{1.0, SymTensor2<double>::isotropic(1.0), 1.0, 0.0};

double max_abs(const Eigen::Matrix2d& m) { return m.cwiseAbs().maxCoeff(); }

Eigen::Matrix<double, 6, 1> flat(const ParameterSample& s) {
  Eigen::Matrix<double, 6, 1> v;
  v << s.rho, s.alpha.xx, s.alpha.xy, s.alpha.yy, s.beta, s.f;
  return v;
}

double rel_diff(const ParameterSample& a, const ParameterSample& b) {
  return (flat(a) - flat(b)).norm() / flat(b).norm();
}

// Random matrix with positive determinant and condition number below ~1e3.
Eigen::Matrix2d random_orientation_preserving(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  while (true) {
    Eigen::Matrix2d a;
    a << u(rng), u(rng), u(rng), u(rng);
    const double det = a.determinant();
    if (det > 1e-3 * a.squaredNorm()) return a;
    if (det < -1e-3 * a.squaredNorm()) {
      a.col(0).swap(a.col(1));
      return a;
    }
  }
}

ParameterSample random_spd_sample(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0.1, 3.0), ang(0.0, kPi), any(-2.0, 2.0);
  return {pos(rng), principal_to_cartesian(pos(rng), pos(rng), ang(rng)), pos(rng), any(rng)};
}

}  // namespace

TEST_CASE("jacobians of the simple maps") {
  CHECK(max_abs(jacobian_at(identity_mapping(), Point(3, -2)) - Eigen::Matrix2d::Identity()) == 0.0);
  CHECK(max_abs(jacobian_at(scale_mapping(2.0), Point(0.4, 9)) - 2.0 * Eigen::Matrix2d::Identity()) == 0.0);
  CHECK(max_abs(finite_difference_jacobian(scale_mapping(2.0), Point(0.4, 9)) - 2.0 * Eigen::Matrix2d::Identity()) <
        1e-8);
}

TEST_CASE("cloak map stretches radially by (b-a)/b and tangentially by r'/r") {
  const Mapping map = cloak_mapping({Point(0, 0), 1.0, 2.0, 1e-3});
  Eigen::Matrix2d expected;
  expected << 0.5, 0.0, 0.0, 1.5;
  CHECK(max_abs(jacobian_at(map, Point(1, 0)) - expected) < 1e-15);
  CHECK(max_abs(finite_difference_jacobian(map, Point(1, 0)) - expected) < 1e-8);
  CHECK_THROWS_AS(jacobian_at(map, Point(0, 0)), DegenerateMapError);
}

TEST_CASE("cloak map sends the centre to r'=a and fixes r=b") {
  const Mapping map = cloak_mapping({Point(0, 0), 1.0, 2.0, 1e-3});
  CHECK(map(Point(0, 0)).norm() == doctest::Approx(1.0));
  CHECK(map(Point(2, 0)).x() == doctest::Approx(2.0));
  const Point p = 1.0 * Point(std::cos(kPi / 3), std::sin(kPi / 3));
  const Point q = map(p);
  CHECK(q.norm() == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(std::atan2(q.y(), q.x()) == doctest::Approx(kPi / 3).epsilon(1e-14));
  CHECK((map.inverse(q) - p).norm() < 1e-14);
  CHECK_THROWS_AS(map.inverse(Point(0.5, 0)), DomainError);
  CHECK_THROWS_AS(cloak_mapping({Point(0, 0), 2.0, 1.0, 1e-3}), ValidationError);
  CHECK_THROWS_AS(cloak_mapping({Point(0, 0), 1.0, 2.0, 0.0}), ValidationError);
}

TEST_CASE("push_forward examples") {
  const ParameterSample s{1.0, SymTensor2<double>::isotropic(1.0), 1.0, 1.0};
  CHECK(push_forward(s, Eigen::Matrix2d::Identity().eval()) == s);

  const auto scaled = push_forward(s, (2.0 * Eigen::Matrix2d::Identity()).eval());
  CHECK(scaled.rho == 0.25);
  CHECK(scaled.alpha == SymTensor2<double>::isotropic(1.0));
  CHECK(scaled.beta == 0.25);
  CHECK(scaled.f == 0.25);

  Eigen::Matrix2d stretch;
  stretch << 2.0, 0.0, 0.0, 1.0;
  const auto st = push_forward(ParameterSample{1.0, SymTensor2<double>::isotropic(1.0), 0.0, 0.0}, stretch);
  CHECK(st.rho == 0.5);
  CHECK(st.alpha == SymTensor2<double>{2.0, 0.0, 0.5});
  CHECK(st.beta == 0.0);

  Eigen::Matrix2d flip;
  flip << 0.0, 1.0, 1.0, 0.0;
  CHECK_THROWS_AS(push_forward(s, flip), DegenerateMapError);
  CHECK_THROWS_AS(push_forward(s, Eigen::Matrix2d::Zero().eval()), DegenerateMapError);
}

TEST_CASE("push_forward is generic over the scalar type") {
  const ParameterSampleT<float> sf{1.0f, SymTensor2<float>::isotropic(1.0f), 1.0f, 1.0f};
  const auto pf = push_forward(sf, Matrix2<float>(2.0f * Matrix2<float>::Identity()));
  CHECK(pf.rho == 0.25f);
  const ParameterSampleT<long double> sl{1.0L, SymTensor2<long double>::isotropic(1.0L), 0.0L, 0.0L};
  Matrix2<long double> a;
  a << 2.0L, 0.0L, 0.0L, 1.0L;
  CHECK(push_forward(sl, a).alpha.xx == 2.0L);
}

TEST_CASE("principal_to_cartesian") {
  CHECK(principal_to_cartesian(1.0 / 3.0, 3.0, 0.0) == SymTensor2<double>{1.0 / 3.0, 0.0, 3.0});
  const auto q = principal_to_cartesian(1.0 / 3.0, 3.0, kPi / 2);
  CHECK(q.xx == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(std::abs(q.xy) < 1e-15);
  CHECK(q.yy == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  const auto d = principal_to_cartesian(1.0 / 3.0, 3.0, kPi / 4);
  CHECK(d.xx == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
  CHECK(d.xy == doctest::Approx(-4.0 / 3.0).epsilon(1e-15));
  CHECK(d.yy == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
  CHECK(d.eigenvalues()(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(d.eigenvalues()(1) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("cloak_params closed form") {
  const CloakSpec spec{Point(0, 0), 1.0, 2.0, 1e-3};
  // Radial direction along +x, so the Cartesian tensor is diag(alpha_r, alpha_theta).
  const auto mid = cloak_params(spec, kUnit, Point(1.5, 0));
  CHECK(mid.alpha.xx == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(mid.alpha.yy == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(std::abs(mid.alpha.xy) < 1e-15);
  CHECK(mid.rho == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(mid.beta == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(mid.f == 0.0);

  const auto outer = cloak_params(spec, kUnit, Point(0, 2));
  const auto ev = outer.alpha.eigenvalues();
  CHECK(ev(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(ev(1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(outer.rho == doctest::Approx(2.0).epsilon(1e-14));

  CHECK(cloak_params(spec, kUnit, Point(3, 0)) == kUnit);
  CHECK_THROWS_AS(cloak_params(spec, kUnit, Point(0.5, 0)), DomainError);
  ParameterSample aniso = kUnit;
  aniso.alpha = {2.0, 0.1, 1.0};
  CHECK_THROWS_AS(cloak_params(spec, aniso, Point(1.5, 0)), UnsupportedError);
}

TEST_CASE("cloak_params clamps the gap at epsilon a") {
  const CloakSpec spec{Point(0, 0), 1.0, 2.0, 1e-2};
  const auto at_edge = cloak_params(spec, kUnit, Point(1.0, 0));
  const auto at_clamp = cloak_params(spec, kUnit, Point(1.01, 0));
  // gap = 0.01 at both points; only r' differs.
  CHECK(at_edge.alpha.xx == doctest::Approx(0.01 / 1.0).epsilon(1e-12));
  CHECK(at_edge.alpha.yy == doctest::Approx(1.0 / 0.01).epsilon(1e-12));
  CHECK(at_clamp.alpha.xx == doctest::Approx(0.01 / 1.01).epsilon(1e-12));
  CHECK(std::isfinite(at_edge.rho));
}

TEST_CASE("cloak_params agrees with the general push-forward inside the shell") {
  for (const CloakSpec& spec : {CloakSpec{Point(0, 0), 1.0, 2.0, 1e-3}, CloakSpec{Point(5, 2), 0.6, 1.2, 1e-3},
                               CloakSpec{Point(-1, 3), 0.3, 2.5, 1e-2}}) {
    CHECK(cloak_consistency_error(spec, kUnit, 1000, 7) <= 1e-8);
    // Finite differences lose digits where the tangential stretch is large, near r' = a.
    CHECK(cloak_consistency_error(spec, kUnit, 1000, 8, true) <= 1e-2);
  }
}

TEST_CASE("bender map corners and conformality") {
  const BenderSpec spec{};
  const Mapping map = bender_mapping(spec);
  const Point origin = map(Point(0, 0));
  CHECK(origin.norm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(origin.x()) < 1e-15);  // theta = 0 is the +y axis
  const Point far = map(Point(1, 1));
  CHECK(far.norm() == doctest::Approx(4.810477380965351).epsilon(1e-14));
  CHECK(std::abs(far.y()) < 1e-14);
  CHECK(spec.r2() == doctest::Approx(4.810477380965351).epsilon(1e-14));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    const Point x(u(rng), u(rng));
    const Eigen::Matrix2d a = jacobian_at(map, x);
    const double r = map(x).norm();
    const double s = r * kPi / (2.0 * spec.a);
    const Eigen::Matrix2d conformal = a / s;
    CHECK(max_abs(conformal.transpose() * conformal - Eigen::Matrix2d::Identity()) < 1e-12);
    CHECK(a.determinant() > 0.0);
    // Stretch isotropy via the singular values.
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(a);
    const auto sv = svd.singularValues();
    CHECK(std::abs(sv(0) - sv(1)) / sv(1) <= 1e-8);
    CHECK(max_abs(finite_difference_jacobian(map, x) - a) / s < 1e-7);
  }
  CHECK_THROWS_AS(map(Point(1.5, 0.5)), DomainError);
}

TEST_CASE("conformal push-forward rotates alpha without stretching it") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> scale(0.1, 10.0), ang(-kPi, kPi);
  for (int k = 0; k < 1000; ++k) {
    const ParameterSample s = random_spd_sample(rng);
    const double c = scale(rng), t = ang(rng);
    Eigen::Matrix2d a;
    a << c * std::cos(t), -c * std::sin(t), c * std::sin(t), c * std::cos(t);
    const auto p = push_forward(s, a);
    const Eigen::Matrix2d rot = a / c;
    const double norm = s.alpha.matrix().norm();
    CHECK((p.alpha.matrix() - rot * s.alpha.matrix() * rot.transpose()).norm() <= 1e-13 * norm);
    CHECK((p.alpha.eigenvalues() - s.alpha.eigenvalues()).norm() <= 1e-12 * norm);
    const ParameterSample iso{s.rho, SymTensor2<double>::isotropic(s.alpha.xx), s.beta, s.f};
    CHECK((push_forward(iso, a).alpha.matrix() - iso.alpha.matrix()).norm() <= 1e-13 * iso.alpha.xx);
    CHECK(p.rho == doctest::Approx(s.rho / (c * c)).epsilon(1e-13));
  }
}

TEST_CASE("bender_params_paper") {
  const BenderSpec spec{};
  const auto unit = bender_params_paper(spec, kUnit, Point(0, 2.0 / kPi));
  CHECK(unit.rho == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(unit.alpha == SymTensor2<double>::isotropic(1.0));
  CHECK(unit.beta == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(unit.f == 0.0);
  const ParameterSample still{1.0, SymTensor2<double>::isotropic(1.0), 0.0, 0.0};
  CHECK(bender_params_paper(spec, still, Point(4.0 / kPi, 0)).rho == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(bender_params_paper({1.0, 1.0, 3.14159, 1.0}, kUnit, Point(0, 2)), UnsupportedError);
  CHECK_THROWS_AS(bender_params_paper({2.0, 1.0, kPi / 2, 1.0}, kUnit, Point(0, 2)), UnsupportedError);
}

TEST_CASE("derived bender material is the push-forward through the conformal map") {
  const BenderSpec spec{};
  const ParameterSample base{1.0, SymTensor2<double>::isotropic(1.0), 0.0, 0.0};
  const Mapping map = bender_mapping(spec);
  for (const Point& x : {Point(0.1, 0.2), Point(0.5, 0.5), Point(0.9, 0.95)}) {
    const Point image = map(x);
    const auto derived = bender_params_derived(spec, base, image);
    CHECK(rel_diff(derived, push_forward(base, jacobian_at(map, x))) < 1e-12);
    const double s = image.norm() * kPi / 2.0;
    CHECK(derived.rho == doctest::Approx(1.0 / (s * s)).epsilon(1e-12));
  }
}

TEST_CASE("composition") {
  const Mapping six = compose(scale_mapping(2.0), scale_mapping(3.0));
  CHECK(max_abs(jacobian_at(six, Point(0.3, -0.2)) - 6.0 * Eigen::Matrix2d::Identity()) < 1e-15);
  CHECK((six(Point(1, 2)) - Point(6, 12)).norm() < 1e-15);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  const BenderSpec bs{};
  const Mapping bender = bender_mapping(bs);
  const Mapping cloak = cloak_mapping({Point(0, 0), 1.0, 2.0, 1e-3});
  for (const Mapping& m : {bender, cloak, scale_mapping(2.0)}) {
    const Mapping same = compose(identity_mapping(), m);
    for (int k = 0; k < 50; ++k) {
      const Point x(u(rng), u(rng));
      CHECK((same(x) - m(x)).norm() == 0.0);
    }
  }
  const Mapping plate_scale = scale_mapping(2.0, bs.plate());
  CHECK_THROWS_AS(compose(bender, plate_scale), CompositionError);
}

TEST_CASE("push-forward follows the chain rule") {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 2000; ++k) {
    const ParameterSample s = random_spd_sample(rng);
    const Eigen::Matrix2d af = random_orientation_preserving(rng);
    const Eigen::Matrix2d ag = random_orientation_preserving(rng);
    const auto once = push_forward(s, (ag * af).eval());
    const auto twice = push_forward(push_forward(s, af), ag);
    CHECK(rel_diff(twice, once) <= 1e-12);
  }

  const Mapping bender = bender_mapping({});
  const Mapping outer = affine_mapping((Eigen::Matrix2d() << 1.5, 0.3, -0.2, 0.8).finished(), Point(1, -2));
  const Mapping both = compose(outer, bender);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int k = 0; k < 200; ++k) {
    const Point x(u(rng), u(rng));
    const ParameterSample s = random_spd_sample(rng);
    const auto direct = push_forward(s, jacobian_at(both, x));
    const auto steps = push_forward(push_forward(s, jacobian_at(bender, x)), jacobian_at(outer, bender(x)));
    CHECK(rel_diff(steps, direct) <= 1e-12);
  }
}

TEST_CASE("push-forward preserves symmetry and positive semidefiniteness") {
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 10000; ++k) {
    const ParameterSample s = random_spd_sample(rng);
    const auto p = push_forward(s, random_orientation_preserving(rng));
    CHECK(p.alpha.eigenvalues()(0) > 0.0);
    CHECK(p.rho > 0.0);
    CHECK(p.beta > 0.0);
  }
}

TEST_CASE("degenerate and out-of-domain maps are rejected") {
  Eigen::Matrix2d flip;
  flip << 1, 0, 0, -1;
  CHECK_THROWS_AS(affine_mapping(flip, Point(0, 0)), DegenerateMapError);
  CHECK_THROWS_AS(affine_mapping(Eigen::Matrix2d::Zero(), Point(0, 0)), DegenerateMapError);
  const Mapping boxed = scale_mapping(2.0, Box{0, 1, 0, 1});
  CHECK_THROWS_AS(jacobian_at(boxed, Point(2, 0.5)), DomainError);
  CHECK_THROWS_AS(scale_mapping(-1.0), DegenerateMapError);
  // A user map that folds the plane.
  const Mapping fold("fold", [](const Point& x) { return Point(x.x() * x.x(), x.y()); }, Box::unbounded(),
                     Box::unbounded());
  CHECK_NOTHROW(jacobian_at(fold, Point(1, 0)));
  CHECK_THROWS_AS(jacobian_at(fold, Point(-1, 0)), DegenerateMapError);
}
