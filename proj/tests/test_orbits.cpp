#include <catch2/catch_amalgamated.hpp>

#include "g6cstar/linmap.hpp"
#include "g6cstar/orbits.hpp"
#include "g6cstar/serialization.hpp"

using namespace g6cstar;

namespace {

GroupElement random_element(Rng& rng, double lo = -2, double hi = 2) {
  return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi),
          rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

// Dyadic random value m / 32 with |m| <= 64; optionally nonzero.
double dyadic(Rng& rng, bool nonzero = false) {
  for (;;) {
    const long m = static_cast<long>(rng.next() % 129) - 64;
    if (nonzero && m == 0) continue;
    return static_cast<double>(m) / 32.0;
  }
}

// A random functional lying exactly (in floating point) in the given orbit
// class; the case-tree invariants vanish exactly by construction.
Functional random_in_class(OrbitKind kind, Rng& rng) {
  Functional f;
  switch (kind) {
    case OrbitKind::SixD:
      for (;;) {
        f = {dyadic(rng), dyadic(rng), dyadic(rng), dyadic(rng, true),
             dyadic(rng, true), dyadic(rng, true)};
        if (std::abs(2 * f.q * f.s - f.r * f.r) > 1e-3) return f;
      }
    case OrbitKind::FourDS: {
      const int e = static_cast<int>(rng.next() % 5) - 2;
      const double sgn = (rng.next() & 1) ? 1.0 : -1.0;
      f.s = sgn * std::ldexp(1.0, e);
      f.r = dyadic(rng);
      f.q = f.r * f.r / (2.0 * f.s);  // exact: power-of-two division
      f.p = dyadic(rng);
      f.a = dyadic(rng);
      f.b = dyadic(rng);
      return f;
    }
    case OrbitKind::FourDR:
      f = {dyadic(rng), dyadic(rng), dyadic(rng), dyadic(rng), dyadic(rng, true), 0};
      return f;
    case OrbitKind::FourDPQ:
      f = {dyadic(rng), dyadic(rng), dyadic(rng, true), dyadic(rng, true), 0, 0};
      return f;
    case OrbitKind::TwoDQ:
      f = {dyadic(rng), dyadic(rng), 0, dyadic(rng, true), 0, 0};
      return f;
    case OrbitKind::TwoDP:
      f = {dyadic(rng), dyadic(rng), dyadic(rng, true), 0, 0, 0};
      return f;
    case OrbitKind::Character:
      f = {dyadic(rng), dyadic(rng), 0, 0, 0, 0};
      return f;
  }
  return f;
}

bool same_class(const OrbitClass& a, const OrbitClass& b, double tol = 1e-7) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case OrbitKind::SixD: return a.eps == b.eps && a.nu == b.nu;
    case OrbitKind::FourDPQ: return a.eps == b.eps && a.nu == b.nu;
    case OrbitKind::FourDR:
    case OrbitKind::FourDS:
      return a.eps == b.eps && std::abs(a.param - b.param) <= tol;
    case OrbitKind::TwoDP:
      return a.eps == b.eps && std::abs(a.param - b.param) <= tol;
    case OrbitKind::TwoDQ:
      return a.nu == b.nu && std::abs(a.param - b.param) <= tol;
    case OrbitKind::Character:
      return std::abs(a.param - b.param) <= tol && std::abs(a.param2 - b.param2) <= tol;
  }
  return false;
}

}  // namespace

TEST_CASE("orbit invariants") {
  Functional f;
  f.q = 1;
  f.s = 1;
  CHECK(orbit_invariants(f, 0).phi == 2.0);  // 2 l(Q) l(S) - l(R)^2
  Functional r;
  r.r = 1;
  CHECK(orbit_invariants(r, 0).phi == -1.0);

  SECTION("sign of phi and of f(S) along sampled 6d orbits") {
    Rng rng(3);
    Functional rep;
    rep.q = 1;
    rep.s = 1;
    for (int i = 0; i < 200; ++i) {
      const Functional sample = coadjoint(random_element(rng), rep);
      const OrbitInvariants inv = orbit_invariants(sample, 0);
      CHECK(inv.phi > 0);
      CHECK(inv.sgn_s == +1);
    }
  }
}

TEST_CASE("classification decision tree") {
  Functional qs;
  qs.q = 1;
  qs.s = 1;
  CHECK(same_class(classify(qs), OrbitClass::six_d(+1, +1)));

  Functional aq;
  aq.a = 3;
  aq.q = 1;
  CHECK(same_class(classify(aq), OrbitClass::two_d_q(3, +1)));

  // S* + R*: sign(phi) = nu * eps gives nu = -1 with eps = +1.
  Functional sr;
  sr.s = 1;
  sr.r = 1;
  CHECK(same_class(classify(sr), OrbitClass::six_d(-1, +1)));

  Functional bs;
  bs.b = 0.5;
  bs.s = -1;
  CHECK(same_class(classify(bs), OrbitClass::four_d_s(0.5, -1)));

  Functional ch;
  ch.a = 1;
  ch.b = 2;
  CHECK(same_class(classify(ch), OrbitClass::character(1, 2)));
}

TEST_CASE("classification is Ad*-invariant") {
  Rng rng(7);
  SECTION("generic functionals (open orbits)") {
    int agree = 0;
    for (int i = 0; i < 1000; ++i) {
      Functional f{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2),
                   rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
      const GroupElement g = random_element(rng);
      if (same_class(classify(coadjoint(g, f)), classify(f))) ++agree;
    }
    CHECK(agree == 1000);
  }
  SECTION("class parameters recovered from exactly-constructed samples") {
    for (OrbitKind k : {OrbitKind::FourDR, OrbitKind::FourDPQ, OrbitKind::TwoDQ,
                        OrbitKind::TwoDP, OrbitKind::Character}) {
      for (int i = 0; i < 100; ++i) {
        const Functional f = random_in_class(k, rng);
        const OrbitClass c = classify(f);
        CHECK(c.kind == k);
        // The canonical reduction lands on the representative of this class.
        const CanonicalRep cr = canonical_rep(f);
        const Functional red = coadjoint(cr.g, f);
        CHECK((red - representative(cr.cls)).norm_inf() <= 1e-8);
      }
    }
  }
}

TEST_CASE("canonical representatives") {
  Rng rng(13);
  SECTION("representative functionals reduce via the identity") {
    Functional qs;
    qs.q = 1;
    qs.s = 1;
    const CanonicalRep cr = canonical_rep(qs);
    CHECK((coadjoint(cr.g, qs) - qs).norm_inf() <= 1e-12);
  }
  SECTION("f = 2B* + Q* + S* reduces to Q* + S*") {
    Functional f;
    f.b = 2;
    f.q = 1;
    f.s = 1;
    const CanonicalRep cr = canonical_rep(f);
    CHECK(same_class(cr.cls, OrbitClass::six_d(+1, +1)));
    Functional target;
    target.q = 1;
    target.s = 1;
    CHECK((coadjoint(cr.g, f) - target).norm_inf() <= 1e-8);
  }
  SECTION("B* + eps S* is its own representative class") {
    for (int eps : {+1, -1}) {
      Functional f;
      f.b = 1;
      f.s = eps;
      const CanonicalRep cr = canonical_rep(f);
      CHECK(same_class(cr.cls, OrbitClass::four_d_s(1, eps)));
      CHECK((coadjoint(cr.g, f) - representative(cr.cls)).norm_inf() <= 1e-12);
    }
  }
  SECTION("200 random functionals per class") {
    for (OrbitKind k : {OrbitKind::SixD, OrbitKind::FourDS, OrbitKind::FourDR,
                        OrbitKind::FourDPQ, OrbitKind::TwoDQ, OrbitKind::TwoDP,
                        OrbitKind::Character}) {
      for (int i = 0; i < 200; ++i) {
        const Functional f = random_in_class(k, rng);
        const CanonicalRep cr = canonical_rep(f);
        CHECK(cr.cls.kind == k);
        CHECK((coadjoint(cr.g, f) - representative(cr.cls)).norm_inf() <= 1e-8);
      }
    }
  }
}

TEST_CASE("stratification") {
  CHECK(stratum(OrbitClass::character(0, 0)).index == 0);
  CHECK(stratum(OrbitClass::two_d_p(1, +1)).index == 1);
  CHECK(stratum(OrbitClass::two_d_q(1, +1)).index == 2);
  CHECK(stratum(OrbitClass::four_d_pq(+1, -1)).index == 3);
  CHECK(stratum(OrbitClass::four_d_r(1, +1)).index == 4);
  CHECK(stratum(OrbitClass::four_d_s(1, +1)).index == 5);
  CHECK(stratum(OrbitClass::six_d(-1, -1)).index == 6);
}

TEST_CASE("closure boundaries") {
  CHECK(closure_boundary(OrbitClass::character(1, 2)).empty());

  SECTION("Q-type 2d orbits bound by a character line") {
    const auto fams = closure_boundary(OrbitClass::two_d_q(3, +1));
    REQUIRE(fams.size() == 1);
    CHECK(fams[0].kind == OrbitKind::Character);
    CHECK(fams[0].char_constraint == CharConstraint::FixedA);
    CHECK(fams[0].char_value == 3.0);
  }
  SECTION("S-type 4d orbits") {
    const auto fams = closure_boundary(OrbitClass::four_d_s(1, +1));
    REQUIRE(fams.size() == 3);
    CHECK(fams[0].kind == OrbitKind::TwoDQ);
    CHECK(fams[0].nu == +1);       // the eps-signed Q-ray only
    CHECK(!fams[0].param);         // a* free
    CHECK(fams[1].kind == OrbitKind::TwoDP);
    CHECK(!fams[1].eps);           // both signs
    CHECK(fams[2].kind == OrbitKind::Character);
  }
  SECTION("open orbits: the sign pattern controls the list") {
    const auto same = closure_boundary(OrbitClass::six_d(+1, +1));
    bool has_fourdr = false;
    for (const auto& f : same) has_fourdr |= f.kind == OrbitKind::FourDR;
    CHECK(!has_fourdr);
    const auto mixed = closure_boundary(OrbitClass::six_d(-1, +1));
    has_fourdr = false;
    for (const auto& f : mixed) has_fourdr |= f.kind == OrbitKind::FourDR;
    CHECK(has_fourdr);
  }
}

TEST_CASE("closure membership") {
  SECTION("representatives lie in their own closure") {
    Rng rng(19);
    for (OrbitKind k : {OrbitKind::SixD, OrbitKind::FourDS, OrbitKind::FourDR,
                        OrbitKind::FourDPQ, OrbitKind::TwoDQ, OrbitKind::TwoDP,
                        OrbitKind::Character}) {
      const Functional f = random_in_class(k, rng);
      const OrbitClass c = classify(f);
      CHECK(in_closure(representative(c), c));
    }
  }
  SECTION("Q* bounds the (+1,+1) open orbit; -Q* does not") {
    Functional qp;
    qp.q = 1;
    Functional qm;
    qm.q = -1;
    CHECK(in_closure(qp, OrbitClass::six_d(+1, +1)));
    CHECK(!in_closure(qm, OrbitClass::six_d(+1, +1)));
    // Mixed-sign orbits absorb the whole hyperplane f(S) = 0.
    CHECK(in_closure(qm, OrbitClass::six_d(-1, +1)));
  }
  SECTION("200 sampled orbit points per class stay in the closure") {
    Rng rng(29);
    for (OrbitKind k : {OrbitKind::SixD, OrbitKind::FourDS, OrbitKind::FourDR,
                        OrbitKind::FourDPQ, OrbitKind::TwoDQ, OrbitKind::TwoDP,
                        OrbitKind::Character}) {
      const Functional f0 = random_in_class(k, rng);
      const OrbitClass c = classify(f0);
      const Functional rep = representative(c);
      for (int i = 0; i < 200; ++i) {
        const Functional sample = coadjoint(random_element(rng), rep);
        CHECK(in_closure(sample, c));
      }
    }
  }
}

TEST_CASE("boundary approach curves converge at their own rates") {
  // Orbit of b*B* + S* (b* = 1).
  Functional f0;
  f0.b = 1;
  f0.s = 1;

  SECTION("to the positive Q-ray (constant slots)") {
    Functional tgt;
    tgt.a = 0.3;
    tgt.b = 0.7;
    tgt.q = 0.8;
    for (double a : {8.0, 12.0, 16.0}) {
      const Functional v = coadjoint(curves::s_orbit_to_q_ray(a, f0, tgt), f0);
      // Errors decay like e^{-a/2}.
      CHECK((v - tgt).norm_inf() <= 4.0 * std::exp(-0.5 * a));
    }
    const Functional v1 = coadjoint(curves::s_orbit_to_q_ray(10, f0, tgt), f0);
    const Functional v2 = coadjoint(curves::s_orbit_to_q_ray(20, f0, tgt), f0);
    CHECK((v2 - tgt).norm_inf() <
          (v1 - tgt).norm_inf() * std::exp(-0.5 * 10) * 4.0);
  }
  SECTION("to the P-plane (rate e^{-a})") {
    Functional tgt;
    tgt.a = -0.4;
    tgt.b = 0.2;
    tgt.p = 1.0;
    for (double a : {10.0, 20.0}) {
      const Functional v = coadjoint(curves::s_orbit_to_p_plane(a, f0, tgt), f0);
      CHECK((v - tgt).norm_inf() <= 4.0 * std::exp(-a));
    }
  }
  SECTION("to a character (rate e^{-a/4})") {
    Functional tgt;
    tgt.a = 0.5;
    tgt.b = -0.3;
    for (double a : {12.0, 24.0, 48.0}) {
      const Functional v = coadjoint(curves::s_orbit_to_character(a, f0, tgt), f0);
      CHECK((v - tgt).norm_inf() <= 4.0 * std::exp(-0.25 * a));
      CHECK((v - tgt).norm_inf() >= 0.1 * std::exp(-0.25 * a));  // genuinely slow
    }
  }
  SECTION("R-type orbit to the P-plane (rate e^{-alpha})") {
    Functional r0;
    r0.b = 1;
    r0.r = 1;
    Functional tgt;
    tgt.a = 0.8;   // X-coeff 1.0, Y-coeff 0.6
    tgt.b = 0.2;
    tgt.p = 2.0;
    for (double al : {10.0, 20.0}) {
      const Functional v = coadjoint(curves::r_orbit_to_p_plane(al, r0, tgt), r0);
      CHECK((v - tgt).norm_inf() <= 4.0 * std::exp(-al));
    }
  }
  SECTION("R-type orbit to the Y-plane (rate e^{-alpha/2})") {
    Functional r0;
    r0.b = 1;
    r0.r = 1;
    Functional tgt;
    tgt.a = 0.5;
    tgt.b = -0.1;
    for (double al : {10.0, 20.0}) {
      const Functional v = coadjoint(curves::r_orbit_to_y_plane(al, r0, tgt), r0);
      CHECK((v - tgt).norm_inf() <= 6.0 * std::exp(-0.5 * al));
    }
  }
}

TEST_CASE("limit sets") {
  SECTION("constant sequences give the closure of the constant") {
    const OrbitClass c = OrbitClass::four_d_s(1, +1);
    const LimitSet ls = limit_set(OrbitSequence::constant(c, 5));
    REQUIRE(!ls.empty);
    CHECK(same_class(*ls.principal, c));
    CHECK(ls.families.size() == closure_boundary(c).size());
  }
  SECTION("b*_k = 1 + 1/k converges to the closure at b* = 1") {
    OrbitSequence seq;
    seq.family = SeqFamily::EpsS;
    seq.sign = +1;
    for (int k = 1; k <= 40; ++k) seq.params.push_back(1.0 + 1.0 / k);
    const LimitSet ls = limit_set(seq);
    REQUIRE(!ls.empty);
    CHECK(ls.principal->kind == OrbitKind::FourDS);
    CHECK(std::abs(ls.principal->param - 1.0) <= 1e-6);
  }
  SECTION("characters escaping to infinity have empty limit set") {
    OrbitSequence seq;
    seq.family = SeqFamily::Characters;
    for (int k = 1; k <= 30; ++k) seq.params.push_back(static_cast<double>(k));
    CHECK(limit_set(seq).empty);
  }
  SECTION("oscillating parameters are rejected as divergent") {
    OrbitSequence seq;
    seq.family = SeqFamily::NuQ;
    for (int k = 1; k <= 30; ++k) seq.params.push_back(k % 2 ? 1.0 : -1.0);
    CHECK(limit_set(seq).empty);
  }
  SECTION("mixed families are rejected") {
    std::vector<OrbitClass> classes = {OrbitClass::four_d_s(1, +1),
                                       OrbitClass::four_d_r(1, +1)};
    CHECK_THROWS_AS(OrbitSequence::from_classes(classes), std::invalid_argument);
    std::vector<OrbitClass> signs = {OrbitClass::four_d_s(1, +1),
                                     OrbitClass::four_d_s(2, -1)};
    CHECK_THROWS_AS(OrbitSequence::from_classes(signs), std::invalid_argument);
  }
  SECTION("from_classes builds line families") {
    std::vector<OrbitClass> classes;
    for (int k = 1; k <= 20; ++k)
      classes.push_back(OrbitClass::four_d_s(2.0 + 1.0 / k, +1));
    const OrbitSequence seq = OrbitSequence::from_classes(classes);
    CHECK(seq.family == SeqFamily::EpsS);
    const LimitSet ls = limit_set(seq);
    REQUIRE(!ls.empty);
    CHECK(std::abs(ls.principal->param - 2.0) <= 1e-6);
  }
}

TEST_CASE("orbit JSON round trip") {
  Rng rng(37);
  for (OrbitKind k : {OrbitKind::SixD, OrbitKind::FourDS, OrbitKind::FourDR,
                      OrbitKind::FourDPQ, OrbitKind::TwoDQ, OrbitKind::TwoDP,
                      OrbitKind::Character}) {
    const OrbitClass c = classify(random_in_class(k, rng));
    const OrbitClass back = orbit_from_json(to_json(c));
    CHECK(same_class(c, back, 0.0));
  }
}
