#include "core/oracle.hpp"

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/KroneckerProduct>

#include "core/entanglement.hpp"
#include "core/error.hpp"

namespace qcrit {

namespace {

int wrap(int j, int L) { return ((j % L) + L) % L; }

// lᵀ on the ring for one translate: index ν·L + site.
std::vector<Eigen::VectorXcd> channel_translates(const std::map<int, Vec2>& channel, int L) {
  std::vector<Eigen::VectorXcd> out;
  for (int j = 0; j < L; ++j) {
    Eigen::VectorXcd l = Eigen::VectorXcd::Zero(2 * L);
    for (const auto& [s, c] : channel)
      for (int nu = 0; nu < 2; ++nu) l(nu * L + wrap(j + s, L)) += c(nu);
    out.push_back(std::move(l));
  }
  return out;
}

}  // namespace

FiniteRing build_ring(const NumericModel& model, int L) {
  if (L < 1) throw Error(ErrorCode::InvalidArgument, "ring size must be positive");
  FiniteRing ring;
  ring.statistics = model.statistics;
  ring.L = L;
  ring.H = MatXc::Zero(2 * L, 2 * L);
  for (const auto& [j, blk] : model.hamiltonian)
    for (int k = 0; k < L; ++k)
      for (int nu = 0; nu < 2; ++nu)
        for (int mu = 0; mu < 2; ++mu) ring.H(nu * L + wrap(k + j, L), mu * L + k) += blk(nu, mu);
  ring.M = MatXc::Zero(2 * L, 2 * L);
  for (const auto& ch : model.lindblads)
    for (const auto& l : channel_translates(ch, L)) ring.M += l * l.adjoint();
  const MatX mr = ring.M.real();
  const MatX mi = ring.M.imag();
  if (model.statistics == Statistics::Fermion) {
    ring.X = (-4.0 * kI * ring.H).real() + 2.0 * mr;
    ring.Y = 4.0 * mi;
  } else {
    const MatX s = symplectic_unit(L);
    ring.X = -(4.0 * ring.H.real() + 2.0 * mi) * s;
    ring.Y = 4.0 * s.transpose() * mr * s;
  }
  return ring;
}

namespace {

MatX solve_kronecker(const MatX& x, const MatX& y) {
  const auto n = x.rows();
  const MatX id = MatX::Identity(n, n);
  const MatX op = Eigen::kroneckerProduct(id, x.transpose()).eval() + Eigen::kroneckerProduct(x.transpose(), id).eval();
  Eigen::FullPivLU<MatX> lu(op);
  if (lu.rcond() < 1e-13)
    throw Error(ErrorCode::Singular, "Singular: Lyapunov operator not invertible (non-unique steady state)");
  const Eigen::VectorXd v = lu.solve(Eigen::Map<const Eigen::VectorXd>(y.data(), y.size()));
  return Eigen::Map<const MatX>(v.data(), n, n);
}

// Aγ + γB = C via complex Schur forms of A and B.
MatX solve_bartels_stewart(const MatX& a, const MatX& b, const MatX& c) {
  const auto n = a.rows();
  Eigen::ComplexSchur<MatXc> sa(a.cast<cplx>()), sb(b.cast<cplx>());
  const MatXc& t = sa.matrixT();
  const MatXc& u = sa.matrixU();
  const MatXc& s = sb.matrixT();
  const MatXc& v = sb.matrixU();
  const MatXc f = u.adjoint() * c.cast<cplx>() * v;
  double scale = t.cwiseAbs().maxCoeff() + s.cwiseAbs().maxCoeff();
  MatXc z = MatXc::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::VectorXcd rhs = f.col(k);
    if (k > 0) rhs -= z.leftCols(k) * s.col(k).head(k);
    MatXc tk = t;
    tk.diagonal().array() += s(k, k);
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::abs(tk(i, i)) < 1e-13 * scale)
        throw Error(ErrorCode::Singular, "Singular: Lyapunov operator not invertible (non-unique steady state)");
    z.col(k) = tk.triangularView<Eigen::Upper>().solve(rhs);
  }
  return (u * z * v.adjoint()).real();
}

}  // namespace

LyapunovSolution dense_lyapunov(const FiniteRing& ring, double forcing_sign) {
  const MatX y = forcing_sign * ring.Y;
  LyapunovSolution sol;
  if (ring.X.rows() <= 24) {
    sol.gamma = solve_kronecker(ring.X, y);
    sol.method = "kronecker";
  } else {
    sol.gamma = solve_bartels_stewart(ring.X.transpose(), ring.X, y);
    sol.method = "bartels-stewart";
  }
  const MatX r = ring.X.transpose() * sol.gamma + sol.gamma * ring.X - y;
  sol.residual = r.norm() / std::max({y.norm(), ring.X.norm() * sol.gamma.norm(), 1e-300});
  sol.physical = check_positivity(sol.gamma, ring.statistics).ok;
  return sol;
}

MatX covariance_rate(const FiniteRing& ring, const MatX& gamma, double trace) {
  return -(ring.X.transpose() * gamma + gamma * ring.X) + trace * ring.Y;
}

CompareReport compare(const CovarianceField& field, const MatX& dense, Statistics dense_statistics,
                      double tolerance) {
  if (field.statistics != dense_statistics)
    throw Error(ErrorCode::StatisticsMismatch,
                std::string("StatisticsMismatch: symbol route is ") + to_string(field.statistics) +
                    ", dense route is " + to_string(dense_statistics));
  if (dense.rows() != dense.cols() || dense.rows() % 2 != 0)
    throw Error(ErrorCode::InvalidArgument, "dense covariance must be 2L x 2L");
  const int L = static_cast<int>(dense.rows() / 2);
  CompareReport rep;
  rep.tolerance = tolerance;
  rep.r_checked = std::min(L / 4, field.r_max);
  for (int r = -rep.r_checked; r <= rep.r_checked; ++r) {
    const int a = wrap(r, L);
    for (int nu = 0; nu < 2; ++nu)
      for (int mu = 0; mu < 2; ++mu)
        rep.max_deviation = std::max(rep.max_deviation, std::abs(dense(nu * L + a, mu * L) - field.at(r)(nu, mu)));
  }
  rep.pass = rep.max_deviation <= tolerance;
  return rep;
}

namespace {

using SpMat = Eigen::SparseMatrix<cplx>;

SpMat sparse_kron(const SpMat& a, const SpMat& b) {
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(static_cast<size_t>(a.nonZeros() * b.nonZeros()));
  for (int ka = 0; ka < a.outerSize(); ++ka)
    for (SpMat::InnerIterator ia(a, ka); ia; ++ia)
      for (int kb = 0; kb < b.outerSize(); ++kb)
        for (SpMat::InnerIterator ib(b, kb); ib; ++ib)
          trip.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(), ia.value() * ib.value());
  SpMat out(a.rows() * b.rows(), a.cols() * b.cols());
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

SpMat sparse_identity(long d) {
  SpMat id(d, d);
  id.setIdentity();
  return id;
}

SpMat to_sparse(const MatXc& m) { return m.sparseView(1e-300, 1.0); }

// Canonical operators: Majoranas w (fermions, JW) or quadratures u (bosons), index ν·L + j.
struct LocalOperators {
  long dim = 0;
  std::vector<MatXc> ops;
};

MatXc kron_chain(const std::vector<MatXc>& factors) {
  MatXc m = factors.front();
  for (size_t i = 1; i < factors.size(); ++i) m = Eigen::kroneckerProduct(m, factors[i]).eval();
  return m;
}

LocalOperators build_operators(Statistics stats, int L, int cutoff) {
  const int local = stats == Statistics::Fermion ? 2 : cutoff;
  MatXc a = MatXc::Zero(local, local);
  for (int n = 1; n < local; ++n) a(n - 1, n) = std::sqrt(double(n));
  const MatXc id = MatXc::Identity(local, local);
  MatXc z = MatXc::Identity(local, local);
  if (stats == Statistics::Fermion) z(1, 1) = -1.0;
  LocalOperators out;
  out.ops.resize(static_cast<size_t>(2 * L));
  for (int j = 0; j < L; ++j) {
    std::vector<MatXc> f;
    for (int k = 0; k < L; ++k) f.push_back(k < j ? (stats == Statistics::Fermion ? z : id) : (k == j ? a : id));
    const MatXc ann = kron_chain(f);
    const MatXc cre = ann.adjoint();
    out.ops[static_cast<size_t>(j)] = ann + cre;
    out.ops[static_cast<size_t>(L + j)] = kI * (ann - cre);
  }
  out.dim = out.ops.front().rows();
  return out;
}

struct Dynamics {
  SpMat liouvillian;
  LocalOperators ops;
};

// Column-major vectorization: vec(AρB) = (Bᵀ ⊗ A) vec ρ.
Dynamics build_liouvillian(const NumericModel& model, int L, int cutoff) {
  Dynamics d;
  d.ops = build_operators(model.statistics, L, cutoff);
  const long dim = d.ops.dim;
  const FiniteRing ring = build_ring(model, L);
  MatXc h = MatXc::Zero(dim, dim);
  for (int a = 0; a < 2 * L; ++a)
    for (int b = 0; b < 2 * L; ++b)
      if (ring.H(a, b) != cplx(0.0)) h += ring.H(a, b) * d.ops.ops[a] * d.ops.ops[b];
  const SpMat id = sparse_identity(dim);
  const SpMat hs = to_sparse(h);
  SpMat lv = cplx(0.0, -1.0) * (sparse_kron(id, hs) - sparse_kron(SpMat(hs.transpose()), id));
  for (const auto& ch : model.lindblads)
    for (const auto& l : channel_translates(ch, L)) {
      MatXc op = MatXc::Zero(dim, dim);
      for (int a = 0; a < 2 * L; ++a)
        if (l(a) != cplx(0.0)) op += l(a) * d.ops.ops[a];
      if (op.cwiseAbs().maxCoeff() == 0.0) continue;
      const SpMat ls = to_sparse(op);
      const SpMat ldl = to_sparse(op.adjoint() * op);
      lv += sparse_kron(SpMat(ls.conjugate()), ls) - cplx(0.5) * sparse_kron(id, ldl) -
            cplx(0.5) * sparse_kron(SpMat(ldl.transpose()), id);
    }
  lv.makeCompressed();
  d.liouvillian = lv;
  return d;
}

MatX covariance_of(const MatXc& rho, const LocalOperators& ops, Statistics stats) {
  const auto n = static_cast<Eigen::Index>(ops.ops.size());
  MatX g(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) {
      const MatXc& wa = ops.ops[a];
      const MatXc& wb = ops.ops[b];
      if (stats == Statistics::Fermion)
        g(a, b) = (0.5 * kI * (rho * (wa * wb - wb * wa)).trace()).real();
      else
        g(a, b) = (rho * wa * wb).trace().real();
    }
  return g;
}

struct Kernel {
  Eigen::VectorXcd vector;
  int dimension = 0;
};

// Shifted-inverse subspace iteration for the eigenvalues of 𝓛 nearest 0.
Kernel liouvillian_kernel(const SpMat& lv) {
  const long n = lv.rows();
  constexpr cplx kShift{1e-3, 0.0};
  SpMat shifted = lv - kShift * sparse_identity(n);
  Eigen::SparseLU<SpMat> lu;
  lu.analyzePattern(shifted);
  lu.factorize(shifted);
  if (lu.info() != Eigen::Success) throw Error(ErrorCode::Singular, "Liouvillian factorization failed");

  const int k = static_cast<int>(std::min<long>(6, n));
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  MatXc q(n, k);
  for (long i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) q(i, j) = cplx(nd(rng), nd(rng));
  const double scale = std::max(1.0, lv.coeffs().cwiseAbs().maxCoeff());
  Eigen::VectorXcd mu;
  MatXc ritz_vecs;
  for (int it = 0; it < 300; ++it) {
    MatXc z = lu.solve(q);
    Eigen::HouseholderQR<MatXc> qr(z);
    q = qr.householderQ() * MatXc::Identity(n, k);
    if (it % 10 != 9) continue;
    const MatXc b = q.adjoint() * lu.solve(q);
    Eigen::ComplexEigenSolver<MatXc> es(b);
    const Eigen::VectorXcd prev = mu;
    mu = es.eigenvalues();
    ritz_vecs = q * es.eigenvectors();
    if (prev.size() == mu.size()) {
      // compare in λ = shift + 1/μ; only the eigenvalues near 0 decide the kernel
      double change = 0.0;
      for (Eigen::Index i = 0; i < mu.size(); ++i) {
        const cplx li = kShift + 1.0 / mu(i);
        if (std::abs(li) > 1e-3 * scale) continue;
        double best = 1e300;
        for (Eigen::Index j = 0; j < prev.size(); ++j) best = std::min(best, std::abs(li - (kShift + 1.0 / prev(j))));
        change = std::max(change, best);
      }
      if (change < 1e-13 * scale) break;
    }
  }
  Kernel ker;
  double best = 1e300;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const cplx lambda = kShift + 1.0 / mu(i);
    if (std::abs(lambda) <= 1e-9 * scale) ++ker.dimension;
    if (std::abs(lambda) < best) {
      best = std::abs(lambda);
      ker.vector = ritz_vecs.col(i);
    }
  }
  return ker;
}

// Truncated Fock spaces are too large to factorize. Row 0 of 𝓛 is swapped for the trace
// functional and the system solved by ILUT-preconditioned BiCGSTAB from two random starts;
// a kernel of dimension > 1 leaves the system singular and the two solutions apart.
Kernel trace_pinned_kernel(const SpMat& lv, long dim) {
  const long n = lv.rows();
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(static_cast<size_t>(lv.nonZeros() + dim));
  for (int k = 0; k < lv.outerSize(); ++k)
    for (SpMat::InnerIterator it(lv, k); it; ++it)
      if (it.row() != 0) trip.emplace_back(it.row(), it.col(), it.value());
  for (long i = 0; i < dim; ++i) trip.emplace_back(0, i * dim + i, 1.0);
  SpMat a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());

  Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<cplx>> solver;
  solver.preconditioner().setDroptol(1e-2);
  solver.preconditioner().setFillfactor(4);
  solver.setTolerance(1e-14);
  solver.setMaxIterations(2000);
  solver.compute(a);
  Kernel ker;
  ker.dimension = 2;
  // zero pivot: the pinned system is singular exactly when the kernel is degenerate
  if (solver.info() != Eigen::Success) return ker;

  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
  e(0) = 1.0;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  Eigen::VectorXcd sol[2];
  bool converged = true;
  for (auto& v : sol) {
    Eigen::VectorXcd guess(n);
    for (long i = 0; i < n; ++i) guess(i) = cplx(nd(rng), nd(rng)) / double(n);
    v = solver.solveWithGuess(e, guess);
    converged = converged && solver.info() == Eigen::Success;
  }
  ker.vector = sol[0];
  const double spread = (sol[0] - sol[1]).norm() / sol[0].norm();
  ker.dimension = converged && spread <= 1e-8 ? 1 : 2;
  return ker;
}

ExactSteadyState exact_once(const NumericModel& model, int L, int cutoff) {
  const Dynamics d = build_liouvillian(model, L, cutoff);
  const Kernel ker = model.statistics == Statistics::Boson ? trace_pinned_kernel(d.liouvillian, d.ops.dim)
                                                           : liouvillian_kernel(d.liouvillian);
  ExactSteadyState out;
  out.statistics = model.statistics;
  out.L = L;
  out.hilbert_dim = d.ops.dim;
  out.kernel_dim = ker.dimension;
  out.fock_cutoff = model.statistics == Statistics::Boson ? cutoff : 0;
  if (ker.dimension != 1)
    throw Error(ErrorCode::DegenerateKernel,
                "DegenerateKernel: Liouvillian kernel dimension " +
                    (model.statistics == Statistics::Boson ? std::string("> 1") : std::to_string(ker.dimension)) +
                    " (steady state not unique at L = " + std::to_string(L) + ")");
  const long dim = d.ops.dim;
  MatXc rho = Eigen::Map<const MatXc>(ker.vector.data(), dim, dim);
  rho /= rho.trace();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  const Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(rho.data(), rho.size());
  out.residual = (d.liouvillian * v).norm() / v.norm();
  out.covariance = covariance_of(rho, d.ops, model.statistics);
  return out;
}

}  // namespace

ExactSteadyState exact_master_equation(const NumericModel& model, int L, const ExactOptions& options) {
  if (model.statistics == Statistics::Fermion) {
    if (L < 1 || L > 5) throw Error(ErrorCode::InvalidArgument, "exact fermionic oracle needs 1 <= L <= 5");
    return exact_once(model, L, 0);
  }
  if (L < 1 || L > 2) throw Error(ErrorCode::InvalidArgument, "exact bosonic oracle needs 1 <= L <= 2");
  if (options.fock_cutoff < 2) throw Error(ErrorCode::InvalidArgument, "Fock cutoff must be >= 2");
  ExactSteadyState out = exact_once(model, L, options.fock_cutoff);
  if (options.convergence_check) {
    const ExactSteadyState fine = exact_once(model, L, 2 * options.fock_cutoff);
    out.cutoff_delta = (fine.covariance - out.covariance).cwiseAbs().maxCoeff();
  }
  return out;
}

RateProbe exact_covariance_rate(const NumericModel& model, int L, std::uint64_t seed) {
  if (model.statistics != Statistics::Fermion)
    throw Error(ErrorCode::InvalidArgument, "rate probe is defined for fermionic rings");
  if (L < 1 || L > 5) throw Error(ErrorCode::InvalidArgument, "rate probe needs 1 <= L <= 5");
  const Dynamics d = build_liouvillian(model, L, 0);
  const long dim = d.ops.dim;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  MatXc a(dim, dim);
  for (long i = 0; i < dim; ++i)
    for (long j = 0; j < dim; ++j) a(i, j) = cplx(nd(rng), nd(rng));
  MatXc rho = a * a.adjoint();
  rho /= rho.trace();
  const Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(rho.data(), rho.size());
  const Eigen::VectorXcd dv = d.liouvillian * v;
  const MatXc drho = Eigen::Map<const MatXc>(dv.data(), dim, dim);
  RateProbe p;
  p.covariance = covariance_of(rho, d.ops, Statistics::Fermion);
  p.exact_rate = covariance_of(drho, d.ops, Statistics::Fermion);
  return p;
}

}  // namespace qcrit
