#include "support.hpp"

using namespace qt;

namespace {

ModelSpec two_site_spec(double g) {
  return with_noise(preset_xy_fermion(0.5, 0.5), NoiseKind::TwoSiteFermion, 1.0, g);
}

ModelSpec boson_spec(double v, double eps = 1.0) {
  return with_noise(preset_boson_hopping(1.0, v), NoiseKind::OnSiteBoson, eps, 0.5);
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) out[k] = lo + (hi - lo) * k / (n - 1);
  return out;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(0);  // nothing thrown
}

}  // namespace

TEST_SUITE("criticality") {
  TEST_CASE("two-site pole sits at pi + i arcosh 2") {
    const auto search = find_poles(drift_and_forcing(two_site(kPi / 3)), 5.0);
    const auto* p = search.nearest();
    REQUIRE(p);
    CHECK(p->condition == PoleCondition::CrossBranch);
    CHECK(std::abs(std::abs(p->phi_star.real()) - kPi) < 1e-9);
    CHECK(p->im_abs == doctest::Approx(std::acosh(2.0)).epsilon(1e-10));
    CHECK(p->residual <= 1e-10);
    CHECK_FALSE(search.critical);
    // the same-branch roots of this model cancel in γ̃
    for (const auto& q : search.poles)
      if (q.condition == PoleCondition::SameBranch) CHECK(q.removable);
  }

  TEST_CASE("two-site inverse length follows arcosh(sec g)") {
    for (double g : {0.2, 0.5, 1.0, 1.3}) {
      const auto len = correlation_length(two_site(g, 0.7));
      CHECK(len.source == LengthSource::Pole);
      CHECK(len.xi_inv == doctest::Approx(std::acosh(1.0 / std::cos(g))).epsilon(1e-9));
    }
  }

  TEST_CASE("boson roots at g = pi/2 are removable") {
    const auto search = find_poles(drift_and_forcing(boson(kPi / 2, 1.0, 1.0, 0.0)), 5.0);
    REQUIRE(search.poles.size() == 4);
    for (const auto& p : search.poles) {
      CHECK(p.removable);
      CHECK(p.im_abs == doctest::Approx(std::asinh(0.5)).epsilon(1e-10));
    }
    CHECK(search.nearest() == nullptr);
  }

  TEST_CASE("boson nearest pole away from pi/2") {
    for (double g : {0.3, 0.7, 1.2}) {
      const auto search = find_poles(drift_and_forcing(boson(g, 1.0, 1.0, 0.0)), 5.0);
      const auto* p = search.nearest();
      REQUIRE(p);
      CHECK_FALSE(p->removable);
      CHECK(p->im_abs == doctest::Approx(std::asinh(std::sin(g) / 2.0)).epsilon(1e-10));
      CHECK(std::abs(std::abs(p->phi_star.real()) - kPi / 2) < 1e-9);
    }
  }

  TEST_CASE("no root lies closer to the axis than the reported pole") {
    for (const auto& m : {boson(0.7, 1.0, 1.0, 0.5), on_site_fermion(0.5), boson(0.4, 0.8, 1.0, -0.3)}) {
      const auto sys = drift_and_forcing(m);
      const auto search = find_poles(sys, 5.0);
      const double im = search.nearest()->im_abs;
      CHECK(count_roots(sys, -(im - 1e-3), im - 1e-3) == 0);
      CHECK(count_roots(sys, im - 1e-3, im + 1e-3) >= 1);
      for (const auto& p : search.poles) CHECK(p.residual <= 1e-10);
    }
  }

  TEST_CASE("on-site fermion gap and softening") {
    CHECK(correlation_length(on_site_fermion(0.5, 1.0, 1.5, 0.5)).xi_inv >= 0.6);
    std::vector<double> xi;
    for (double B : {1.5, 1.0, 0.5, 0.0}) xi.push_back(correlation_length(on_site_fermion(0.5, 1.0, B, 0.5)).xi_inv);
    for (size_t k = 1; k < xi.size(); ++k) CHECK(xi[k] < xi[k - 1]);
  }

  TEST_CASE("tail fit agrees with the pole") {
    for (const auto& m : {two_site(0.3), two_site(0.9), boson(0.3, 1.0, 1.0, 0.3), boson(0.9, 1.0, 1.0, 0.3)}) {
      const auto len = correlation_length(m);
      REQUIRE(len.tail.available);
      CHECK(len.agreement <= 0.01);
    }
  }

  TEST_CASE("critical points carry a real pole") {
    const auto sys = drift_and_forcing(two_site(0.0));
    CHECK(std::abs(pair_determinant(sys, kPi)) <= 1e-12);
    CHECK(max_abs(symbol_at_real_pole(sys, kPi)) <= 1e-10);
    // the fourfold root at the critical point lands on the axis
    const auto at_pi = find_poles(drift_and_forcing(two_site(kPi)), 5.0);
    CHECK(at_pi.critical);
    REQUIRE(at_pi.nearest());
    CHECK(at_pi.nearest()->on_real_axis);
    bool on_axis = false;
    for (const auto& p : find_poles(sys, 5.0).poles) on_axis = on_axis || p.on_real_axis;
    CHECK(on_axis);
    const auto near = correlation_length(two_site(1e-3));
    CHECK(near.xi_inv == doctest::Approx(1e-3).epsilon(1e-3));
  }

  TEST_CASE("two-site exponent is one and the stale reference is flagged") {
    const auto samples = sweep_correlation_length(two_site_spec(0.1), "g", linspace(0.01, 0.3, 30));
    const auto fit = exponent_fit(samples, 0.0, 0.5);
    CHECK(fit.lambda == doctest::Approx(1.0).epsilon(0.03));
    CHECK(std::abs(fit.g_c) < 0.01);
    CHECK(fit.reference_discrepant);
    CHECK(fit.residual < 0.05);
    const auto agree = exponent_fit(samples, 0.0, 1.0);
    CHECK_FALSE(agree.reference_discrepant);
  }

  TEST_CASE("acoustic boson exponent") {
    for (double v : {0.0, 0.5}) {
      const auto samples = sweep_correlation_length(boson_spec(v), "g", linspace(0.01, 0.3, 30));
      CHECK(exponent_fit(samples, 0.0).lambda == doctest::Approx(1.0).epsilon(0.05));
    }
  }

  TEST_CASE("degenerate sweeps are refused") {
    std::vector<SweepSample> flat;
    for (double g : linspace(0.1, 1.0, 12)) flat.push_back({g, 0.7});
    CHECK(code_of([&] { exponent_fit(flat, 0.0); }) == ErrorCode::FitDegenerate);

    std::vector<SweepSample> few;
    for (double g : linspace(0.1, 1.0, 5)) few.push_back({g, g});
    CHECK(code_of([&] { exponent_fit(few, 0.0); }) == ErrorCode::InvalidArgument);

    // gapped optical branch: ξ⁻¹ stays finite and is not monotone in g
    const auto optical = sweep_correlation_length(boson_spec(1.5), "g", linspace(0.01, 3.11, 30));
    double lo = 1e300;
    for (const auto& s : optical) lo = std::min(lo, s.xi_inv);
    CHECK(lo > 0.5);
    CHECK(code_of([&] { exponent_fit(optical, 0.0); }) == ErrorCode::FitDegenerate);
  }

  TEST_CASE("boson drift rate") {
    for (double g : {0.3, 0.7, 1.4})
      for (double eps : {0.5, 1.0}) {
        const auto sys = drift_and_forcing(boson(g, eps, 1.0, 0.3));
        CHECK(min_drift_rate(sys) == doctest::Approx(2.0 * eps * eps * std::sin(g)).epsilon(1e-10));
      }
  }

  TEST_CASE("slowing down ratio stays positive") {
    auto spec = with_noise(preset_xy_fermion(0.5, 0.5), NoiseKind::TwoSiteFermion, 0.5, 0.1);
    const auto rep = slowing_down_check(spec, "g", linspace(0.02, 0.5, 12));
    CHECK(rep.bounded_below());
    CHECK(rep.inf_ratio > 0.0);
    CHECK(rep.sup_ratio >= rep.inf_ratio);
    for (const auto& p : rep.points) {
      CHECK(p.tau > 0.0);
      CHECK(p.ratio == doctest::Approx(p.tau / p.xi));
    }
  }

  TEST_CASE("noise-free and unstable systems are refused") {
    const auto bare = drift_and_forcing(evaluate_validated(preset_xy_fermion(0.5, 0.5)));
    CHECK(code_of([&] { find_poles(bare, 5.0); }) == ErrorCode::Singular);
    CHECK(code_of([&] { correlation_length(boson(-0.4)); }) == ErrorCode::Unstable);
  }

  TEST_CASE("with_param rebinds one parameter") {
    const auto spec = with_param(two_site_spec(0.1), "g", 0.8);
    CHECK(spec.params.at("g") == 0.8);
    CHECK(spec.params.at("B") == 0.5);
    CHECK_THROWS_AS(with_param(spec, "nope", 1.0), Error);
  }
}
