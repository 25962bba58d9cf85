#include "support.hpp"

using namespace qt;

namespace {

double peak(const MatX& m) { return m.cwiseAbs().maxCoeff(); }

CompareReport symbol_vs_dense(const NumericModel& m, int L, int grid) {
  const auto field = correlations(covariance_symbol(m, grid), L / 4);
  return compare(field, dense_lyapunov(build_ring(m, L)).gamma, m.statistics, 1e-10);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(0);
}

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("hand-built ring") {
    FiniteRing ring;
    ring.statistics = Statistics::Boson;
    ring.L = 1;
    ring.X = MatX::Identity(2, 2);
    ring.Y = MatX::Zero(2, 2);
    ring.Y(0, 0) = 2.0;
    ring.Y(1, 1) = 4.0;
    const auto sol = dense_lyapunov(ring);
    CHECK(std::abs(sol.gamma(0, 0) - 1.0) < 1e-14);
    CHECK(std::abs(sol.gamma(1, 1) - 2.0) < 1e-14);
    CHECK(std::abs(sol.gamma(0, 1)) < 1e-14);
    CHECK(sol.method == "kronecker");
  }

  TEST_CASE("two-site ring matches the symbol route") {
    const auto rep = symbol_vs_dense(two_site(kPi / 3), 32, 32);
    CHECK(rep.r_checked == 8);
    CHECK(rep.max_deviation <= 1e-10);
    CHECK(rep.pass);
  }

  TEST_CASE("circulant exactness over random draws") {
    std::mt19937 rng(71);
    std::uniform_real_distribution<double> U(-1.5, 1.5), G(0.2, 2.9), E(0.3, 1.5);
    for (int k = 0; k < 5; ++k) {
      CHECK(symbol_vs_dense(two_site(G(rng), E(rng), U(rng), U(rng)), 64, 64).max_deviation <= 1e-10);
      CHECK(symbol_vs_dense(boson(G(rng), E(rng), U(rng), U(rng)), 64, 64).max_deviation <= 1e-10);
    }
  }

  TEST_CASE("finer grids differ only by wrap-around") {
    const auto rep = symbol_vs_dense(two_site(kPi / 3), 64, 128);
    CHECK(rep.max_deviation <= 1e-12);
  }

  TEST_CASE("both dense methods agree with the symbol") {
    const auto m = boson(0.8, 1.0, 1.0, 0.3);
    for (int L : {12, 13}) {
      const auto sol = dense_lyapunov(build_ring(m, L));
      CHECK(sol.method == (L <= 12 ? "kronecker" : "bartels-stewart"));
      CHECK(sol.residual <= 1e-12);
      CHECK(sol.physical);
      const auto field = correlations(covariance_symbol(m, L), L / 4);
      CHECK(compare(field, sol.gamma, m.statistics).max_deviation <= 1e-10);
    }
  }

  TEST_CASE("unstable bosons give an unphysical Lyapunov solution") {
    const auto sol = dense_lyapunov(build_ring(boson(-kPi / 2, 1.0, 1.0, 0.0), 8));
    CHECK_FALSE(sol.physical);
  }

  TEST_CASE("statistics must match") {
    const auto field = correlations(covariance_symbol(boson(0.8), 64), 8);
    const auto dense = dense_lyapunov(build_ring(two_site(0.8), 64)).gamma;
    CHECK(code_of([&] { compare(field, dense, Statistics::Fermion); }) == ErrorCode::StatisticsMismatch);
  }

  TEST_CASE("exact master equation, single fermion") {
    const auto m = on_site_fermion(0.7, 0.8, 1.5, 0.5);
    const auto ex = exact_master_equation(m, 1);
    CHECK(ex.kernel_dim == 1);
    CHECK(ex.hilbert_dim == 2);
    CHECK(peak(ex.covariance - dense_lyapunov(build_ring(m, 1)).gamma) <= 1e-10);
  }

  TEST_CASE("exact master equation, three fermions") {
    for (const auto& m : {two_site(0.9, 0.5), on_site_fermion(0.9, 0.5)}) {
      const auto ex = exact_master_equation(m, 3);
      CHECK(ex.residual <= 1e-12);
      CHECK(peak(ex.covariance - dense_lyapunov(build_ring(m, 3)).gamma) <= 1e-9);
      CHECK(check_positivity(ex.covariance, Statistics::Fermion).ok);
    }
  }

  TEST_CASE("noise-free fermions have a degenerate kernel") {
    CHECK(code_of([&] { exact_master_equation(on_site_fermion(0.5, 0.0), 2); }) == ErrorCode::DegenerateKernel);
    CHECK(code_of([&] { exact_master_equation(boson(0.5, 0.0), 1); }) == ErrorCode::DegenerateKernel);
  }

  TEST_CASE("exact size limits") {
    CHECK(code_of([&] { exact_master_equation(two_site(0.5), 6); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { exact_master_equation(boson(0.5), 3); }) == ErrorCode::InvalidArgument);
    ExactOptions o;
    o.fock_cutoff = 1;
    CHECK(code_of([&] { exact_master_equation(boson(0.5), 1, o); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("adopted sign reproduces the exact dynamics") {
    for (const auto& m : {two_site(0.9, 0.5), on_site_fermion(0.6, 0.7)}) {
      const auto ring = build_ring(m, 3);
      const auto probe = exact_covariance_rate(m, 3, 7);
      const MatX rate = covariance_rate(ring, probe.covariance);
      CHECK(peak(probe.exact_rate - rate) <= 1e-12);
      CHECK(peak(probe.exact_rate + rate) >= 1e-3);

      const auto ex = exact_master_equation(m, 3);
      CHECK(peak(ex.covariance - dense_lyapunov(ring, 1.0).gamma) <= 1e-9);
      CHECK(peak(ex.covariance - dense_lyapunov(ring, -1.0).gamma) >= 1e-3);
    }
    CHECK(code_of([&] { exact_covariance_rate(boson(0.5), 1, 7); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("bosonic exact oracle in a truncated Fock space") {
    ExactOptions o;
    o.fock_cutoff = 30;
    const auto m = boson(0.9, 1.0, 1.0, 0.3);
    const auto ex = exact_master_equation(m, 1, o);
    CHECK(ex.fock_cutoff == 30);
    CHECK(ex.cutoff_delta <= 1e-12);
    CHECK(peak(ex.covariance - dense_lyapunov(build_ring(m, 1)).gamma) <= 1e-12);
    CHECK(check_positivity(ex.covariance, Statistics::Boson).ok);

    // default cutoff 8 on two sites, with the doubling check bounding the truncation error
    const auto two = exact_master_equation(m, 2);
    const double err = peak(two.covariance - dense_lyapunov(build_ring(m, 2)).gamma);
    CHECK(two.fock_cutoff == 8);
    CHECK(err <= 1e-3);
    CHECK(err <= 2.0 * two.cutoff_delta + 1e-9);
  }
}
