#include "support.hpp"

using namespace qt;

namespace {

double closed_form_two_site(double g, double phi) {
  return std::sin(g) * std::sin(phi) / (2.0 * (1.0 + std::cos(g) * std::cos(phi)));
}

double max_diff(const CovarianceSymbol& a, const CovarianceSymbol& b) {
  double d = 0.0;
  for (size_t k = 0; k < a.size(); ++k) d = std::max(d, max_abs(a.values[k] - b.values[k]));
  return d;
}

}  // namespace

TEST_SUITE("steady-state") {
  TEST_CASE("sylvester solve examples") {
    Mat2 y;
    y << 2.0, 0.0, 0.0, 4.0;
    const auto s = solve_sylvester_at(Mat2::Identity(), Mat2::Identity(), y);
    Mat2 want;
    want << 1.0, 0.0, 0.0, 2.0;
    CHECK(max_abs(s.value - want) < 1e-15);
    CHECK(s.residual < 1e-15);

    for (double B : {0.5, 0.7, 2.0})
      for (double G : {0.0, 0.3, 1.0}) {
        const auto df = drift_and_forcing(two_site(kPi / 2, 1.0, B, G));
        const double phi = kPi / 2;
        const auto sol = solve_sylvester_at(df.drift(-phi), df.drift(phi), df.forcing(phi));
        CHECK(max_abs(sol.value - cplx(0, -2) * 0.5 * Mat2::Identity()) < 1e-12);
      }

    const auto db = drift_and_forcing(boson(kPi / 2, 1.0, 1.0, 0.3));
    for (double phi : {-2.0, 0.1, 1.3}) {
      const auto sol = solve_sylvester_at(db.drift(-phi), db.drift(phi), db.forcing(phi));
      CHECK(max_abs(sol.value - Mat2::Identity()) < 1e-12);
    }
  }

  TEST_CASE("singular sylvester system is refused") {
    try {
      solve_sylvester_at(Mat2::Zero(), Mat2::Zero(), Mat2::Identity());
      FAIL("expected Singular");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Singular);
    }
  }

  TEST_CASE("two-site symbol ignores the Hamiltonian") {
    const double g = 0.9;
    const auto a = covariance_symbol(two_site(g, 0.5, 0.7, 0.3), 1024);
    const auto b = covariance_symbol(two_site(g, 0.5, 2.0, 1.0), 1024);
    CHECK(max_diff(a, b) <= 1e-10);
    CHECK(a.max_residual <= 1e-10);

    // critical XX point: a drift zero mode at phi = 0 leaves the symbol unchanged
    const auto c = covariance_symbol(two_site(g, 0.5, 1.0, 0.0), 1024);
    CHECK(c.flagged_count() == 1);
    CHECK(max_diff(a, c) <= 1e-13);
    const auto fc = correlations(c, 64);
    const auto fa = correlations(a, 64);
    CHECK(fc.refined_cells == 1);
    for (int r = -64; r <= 64; ++r) CHECK((fc.at(r) - fa.at(r)).cwiseAbs().maxCoeff() <= 1e-10);
  }

  TEST_CASE("unstable boson is refused with the offending momenta") {
    try {
      covariance_symbol(boson(-kPi / 2, 1.0, 1.0, 0.0), 256);
      FAIL("expected Unstable");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Unstable);
      CHECK(std::string(e.what()).find("phi") != std::string::npos);
    }
  }

  TEST_CASE("noise-free fermion is singular everywhere") {
    const auto num = evaluate_validated(preset_xy_fermion(0.5, 0.5));
    const auto sym = covariance_symbol(num, 256);
    CHECK(sym.flagged_count() == sym.size());
    CHECK_THROWS_AS(correlations(sym, 8), Error);
  }

  TEST_CASE("constant symbol transforms to a single block") {
    DriftForcing df;
    df.statistics = Statistics::Boson;
    df.drift = TrigPolynomial({{0, Mat2::Identity()}});
    df.forcing = TrigPolynomial({{0, 2.0 * 1.7 * Mat2::Identity()}});
    const auto field = correlations(covariance_symbol(df, 256), 16);
    CHECK((field.at(0) - 1.7 * Mat2r::Identity()).norm() < 1e-13);
    for (int r = 1; r <= 16; ++r) {
      CHECK(field.at(r).norm() < 1e-14);
      CHECK(field.at(-r).norm() < 1e-14);
    }
  }

  TEST_CASE("two-site correlations decay at the analytic rate") {
    const auto field = correlations(covariance_symbol(two_site(kPi / 3), 1024), 64);
    const double want = std::exp(-std::acosh(2.0));
    CHECK(want == doctest::Approx(0.2679).epsilon(1e-4));
    for (int r = 3; r < 12; ++r) CHECK(field.at(r + 1).norm() / field.at(r).norm() == doctest::Approx(want).epsilon(1e-8));
  }

  TEST_CASE("two-site real-space blocks match the closed form") {
    // γ(r) = (1/N) Σ γ̃ e^{iφr} with γ̃ = −2i f(φ)𝟙 and f odd.
    const double g = 0.7;
    const int n = 1024;
    const auto field = correlations(covariance_symbol(two_site(g), n), 8);
    for (int r = 0; r <= 8; ++r) {
      double want = 0.0;
      for (double phi : momentum_grid(n)) want += 2.0 * closed_form_two_site(g, phi) * std::sin(phi * r);
      want /= n;
      CHECK(std::abs(field.at(r)(0, 0) - want) < 1e-13);
      CHECK(std::abs(field.at(r)(1, 1) - want) < 1e-13);
      CHECK(std::abs(field.at(r)(0, 1)) < 1e-13);
    }
  }

  TEST_CASE("pure product boson at g = pi/2") {
    const auto field = correlations(covariance_symbol(boson(kPi / 2, 1.0, 1.0, 0.4), 256), 16);
    CHECK((field.at(0) - Mat2r::Identity()).norm() < 1e-12);
    for (int r = 1; r <= 16; ++r) CHECK(field.at(r).norm() < 1e-12);
  }

  TEST_CASE("flagged momenta are refined, not dropped") {
    // At g = 0 the drift loses rank at φ = π, a grid point; the symbol vanishes elsewhere.
    const auto sym = covariance_symbol(two_site(0.0), 256);
    REQUIRE(sym.flagged_count() == 1);
    const auto field = correlations(sym, 16);
    CHECK(field.refined_cells == 1);
    for (int r = -16; r <= 16; ++r) CHECK(field.at(r).norm() < 1e-9);
  }

  TEST_CASE("evolution relaxes to the fixed point") {
    const auto model = two_site(kPi / 3);
    const auto steady = covariance_symbol(model, 256);
    const auto still = evolve_symbol(steady, 5.0, 500);
    double d = 0.0;
    for (size_t k = 0; k < steady.size(); ++k)
      if (!steady.flagged[k]) d = std::max(d, max_abs(still.values[k] - steady.values[k]));
    CHECK(d <= 1e-9);

    const auto zero = zero_symbol(steady.system, 256);
    const auto late = evolve_symbol(zero, 80.0, 8000);
    d = 0.0;
    for (size_t k = 0; k < steady.size(); ++k)
      if (!steady.flagged[k]) d = std::max(d, max_abs(late.values[k] - steady.values[k]));
    CHECK(d <= 1e-6);
  }

  TEST_CASE("relaxation rate matches the drift spectrum") {
    for (const auto& model : {two_site(0.9, 0.7), on_site_fermion(0.6, 0.8), boson(0.8, 0.6, 1.0, 0.3)}) {
      const auto steady = covariance_symbol(model, 256);
      const auto zero = zero_symbol(steady.system, 256);
      const double t1 = 2.0, t2 = 4.0;
      const auto a = evolve_symbol(zero, t1, 2000);
      const auto b = evolve_symbol(zero, t2, 4000);
      for (size_t k : {size_t(17), size_t(90), size_t(201)}) {
        if (steady.flagged[k]) continue;
        const double d1 = max_abs(a.values[k] - steady.values[k]);
        const double d2 = max_abs(b.values[k] - steady.values[k]);
        if (d2 < 1e-13) continue;
        const double rate = std::log(d1 / d2) / (t2 - t1);
        const double want = covariance_decay_rate(steady.system, steady.phi[k]);
        CHECK(rate >= 0.5 * want);
        CHECK(rate <= 2.0 * want);
      }
    }
  }

  TEST_CASE("evolution refuses unstable bosons") {
    const auto df = drift_and_forcing(boson(-0.5));
    CHECK_THROWS_AS(evolve_symbol(zero_symbol(df, 256), 1.0, 10), Error);
  }

  TEST_CASE("residual, Hermiticity and positivity invariants") {
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> U(-1.5, 1.5), G(0.2, 2.9), E(0.3, 1.5);
    for (int k = 0; k < 4; ++k) {
      const std::vector<NumericModel> models = {two_site(G(rng), E(rng), U(rng), U(rng)),
                                                on_site_fermion(G(rng), E(rng), 1.5 + std::abs(U(rng)), U(rng)),
                                                boson(G(rng), E(rng), U(rng), U(rng))};
      for (const auto& m : models) {
        const auto sym = covariance_symbol(m, 512);
        CHECK(sym.max_residual <= 1e-10);
        if (m.statistics == Statistics::Boson)
          for (const auto& v : sym.values) CHECK(max_abs(v - v.adjoint()) <= 1e-10);
        const auto field = correlations(sym, 32);
        const auto gamma = assemble_restriction(field, 24, 1e-6);
        const auto pos = check_positivity(gamma, m.statistics);
        CHECK(pos.ok);
        CHECK(pos.symmetry_error <= 1e-12);
      }
    }
  }

  TEST_CASE("doubling the grid does not move the correlations") {
    for (const auto& m : {two_site(kPi / 3), boson(0.9, 1.0, 1.0, 0.3), on_site_fermion(0.5)}) {
      const auto a = correlations(covariance_symbol(m, 512), 32);
      const auto b = correlations(covariance_symbol(m, 1024), 32);
      for (int r = -32; r <= 32; ++r) CHECK((a.at(r) - b.at(r)).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }

  TEST_CASE("parallel and serial sampling agree bit for bit") {
    const auto m = boson(0.7, 1.0, 1.0, 0.2);
    const auto a = covariance_symbol(m, 1024, 1);
    const auto b = covariance_symbol(m, 1024, 4);
    for (size_t k = 0; k < a.size(); ++k) CHECK(a.values[k] == b.values[k]);
  }

  TEST_CASE("correlations require enough momenta") {
    const auto sym = covariance_symbol(two_site(0.5), 256);
    CHECK_THROWS_AS(correlations(sym, 200), Error);
  }
}
