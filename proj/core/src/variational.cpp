#include "chainlab/variational.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "chainlab/error.hpp"

namespace chainlab {

using symbolic::Letters;
using symbolic::Mode;
using symbolic::Monomial;
using symbolic::RealPolynomial;
using symbolic::VectorField;

MomentTable::MomentTable(const Potential& potential, double beta, int max_degree)
    : beta_(beta), max_degree_(max_degree) {
  if (!(beta > 0.0)) throw Error("moment table: beta must be positive");
  const int n = max_degree + 1;
  nu_.assign(static_cast<std::size_t>(n * n * n * n), 0.0);
  auto ipow = [](double x, int e) {
    double out = 1.0;
    for (int k = 0; k < e; ++k) out *= x;
    return out;
  };
  for (int r = 0; r <= max_degree; ++r)
    for (int v = 0; r + v <= max_degree; ++v)
      for (int dv = 0; r + v + dv <= max_degree; ++dv)
        for (int d2v = 0; r + v + dv + d2v <= max_degree; ++d2v) {
          if ((r + dv) % 2 != 0) continue;
          double value = 1.0;
          if (r + v + dv + d2v > 0) {
            value = gibbs_expectation(
                potential, beta,
                [&](double x) {
                  return ipow(x, r) * ipow(potential.V(x), v) * ipow(potential.dV(x), dv) *
                         ipow(potential.d2V(x), d2v);
                },
                true);
          }
          nu_[index(r, v, dv, d2v)] = value;
        }
}

std::size_t MomentTable::index(int r, int v, int dv, int d2v) const {
  const int n = max_degree_ + 1;
  return static_cast<std::size_t>(((r * n + v) * n + dv) * n + d2v);
}

double MomentTable::mu(int a) const {
  if (a < 0) throw Error("moment table: negative power");
  if (a % 2 != 0) return 0.0;
  double out = 1.0;
  for (int k = a - 1; k > 0; k -= 2) out *= k;
  return out * std::pow(beta_, -0.5 * a);
}

double MomentTable::nu(int dv, int r, int d2v, int v) const {
  if (dv < 0 || r < 0 || d2v < 0 || v < 0 || r + v + dv + d2v > max_degree_) {
    std::ostringstream msg;
    msg << "moment table: letters (r^" << r << ", V^" << v << ", V'^" << dv << ", V''^" << d2v
        << ") exceed degree " << max_degree_;
    throw Error(msg.str());
  }
  return nu_[index(r, v, dv, d2v)];
}

double MomentTable::site(const Letters& l) const {
  return mu(l.p) * nu(l.dv, l.r, l.d2v, l.v);
}

MomentTable build_moment_table(const Potential& potential, double beta, int max_degree) {
  return MomentTable(potential, beta, max_degree);
}

namespace {

double monomial_moment(const Monomial& m, const MomentTable& table) {
  double out = 1.0;
  for (const auto& f : m) {
    out *= table.site(f.letters);
    if (out == 0.0) break;
  }
  return out;
}

}  // namespace

double expect(const RealPolynomial& f, const MomentTable& table) {
  double total = 0.0;
  for (const auto& [m, c] : f.terms()) total += c * monomial_moment(m, table);
  return total;
}

double expect(const symbolic::ExactPolynomial& f, const MomentTable& table) {
  return expect(symbolic::to_real(f), table);
}

double expect_product(const RealPolynomial& f, const RealPolynomial& g, const MomentTable& table) {
  double total = 0.0;
  for (const auto& [ma, ca] : f.terms())
    for (const auto& [mb, cb] : g.terms()) total += ca * cb * monomial_moment(symbolic::multiply(ma, mb), table);
  return total;
}

std::vector<Monomial> trial_monomials(int window, int degree, bool even_in_p) {
  const int vars = 2 * (window + 1);
  std::vector<Monomial> out;
  std::vector<int> powers(static_cast<std::size_t>(vars), 0);
  std::function<void(int, int)> rec = [&](int var, int remaining) {
    if (var == vars) {
      Monomial m;
      int total = 0, pdeg = 0;
      for (int s = 0; s <= window; ++s) {
        Letters l;
        l.p = static_cast<std::uint8_t>(powers[2 * s]);
        l.r = static_cast<std::uint8_t>(powers[2 * s + 1]);
        total += l.p + l.r;
        pdeg += l.p;
        if (!l.empty()) m.push_back({s, l});
      }
      if (total == 0 || m.front().site != 0) return;
      if ((pdeg % 2 == 0) != even_in_p) return;
      out.push_back(std::move(m));
      return;
    }
    for (int e = 0; e <= remaining; ++e) {
      powers[static_cast<std::size_t>(var)] = e;
      rec(var + 1, remaining - e);
    }
    powers[static_cast<std::size_t>(var)] = 0;
  };
  rec(0, degree);
  std::sort(out.begin(), out.end(), [](const Monomial& a, const Monomial& b) {
    const int da = symbolic::total_degree(a), db = symbolic::total_degree(b);
    return da != db ? da < db : a < b;
  });
  return out;
}

void check_parity(const std::vector<RealPolynomial>& f_basis, const std::vector<RealPolynomial>& g_basis) {
  for (const auto& f : f_basis)
    for (const auto& [m, c] : f.terms())
      if (symbolic::p_degree(m) % 2 != 0)
        throw Error("f trial function must be even in p: " + f.str());
  for (const auto& g : g_basis)
    for (const auto& [m, c] : g.terms())
      if (symbolic::p_degree(m) % 2 == 0)
        throw Error("g trial function must be odd in p: " + g.str());
}

namespace {

struct PseudoInverse {
  Eigen::MatrixXd inverse;
  int rank = 0;
  double cond = 0.0;
};

PseudoInverse pseudo_inverse(const Eigen::MatrixXd& a) {
  PseudoInverse out;
  const auto n = a.rows();
  out.inverse = Eigen::MatrixXd::Zero(n, n);
  if (n == 0) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (a + a.transpose()));
  const Eigen::VectorXd& values = eig.eigenvalues();
  const double top = values.cwiseAbs().maxCoeff();
  if (top == 0.0) return out;
  const double cutoff = 1e-12 * top;
  double smallest = top;
  Eigen::VectorXd inv_values = Eigen::VectorXd::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (values(k) > cutoff) {
      inv_values(k) = 1.0 / values(k);
      smallest = std::min(smallest, values(k));
      ++out.rank;
    }
  }
  out.cond = top / smallest;
  out.inverse = eig.eigenvectors() * inv_values.asDiagonal() * eig.eigenvectors().transpose();
  return out;
}

RealPolynomial translates(const RealPolynomial& f, int range) {
  RealPolynomial out(f.mode());
  for (int j = -range; j <= range; ++j) out += f.shift(j);
  return out;
}

}  // namespace

SaddleSolution solve_saddle(const MomentTable& table, Mode mode, double gamma,
                            const std::vector<RealPolynomial>& f_basis,
                            const std::vector<RealPolynomial>& g_basis, int gamma_range) {
  if (!(gamma > 0.0)) throw Error("solve_saddle: gamma must be positive");
  check_parity(f_basis, g_basis);
  using P = RealPolynomial;
  const VectorField x0{VectorField::Kind::X, 0};
  const VectorField y01{VectorField::Kind::Y, 0};
  const auto nf = static_cast<Eigen::Index>(f_basis.size());
  const auto ng = static_cast<Eigen::Index>(g_basis.size());

  const P u = P::p(0, mode) * P::dV(1, mode);
  const P wa = symbolic::current_hamiltonian<double>(0, mode);

  std::vector<P> xf, yf, af, xg, yg, sum_g;
  for (const auto& phi : f_basis) {
    if (phi.mode() != mode) throw Error("solve_saddle: basis mode mismatch");
    const P sum = translates(phi, gamma_range);
    xf.push_back(symbolic::vf_apply(x0, sum));
    yf.push_back(symbolic::vf_apply(y01, sum));
    af.push_back(symbolic::antisymmetric_part(phi));
  }
  for (const auto& psi : g_basis) {
    if (psi.mode() != mode) throw Error("solve_saddle: basis mode mismatch");
    sum_g.push_back(translates(psi, gamma_range));
    xg.push_back(symbolic::vf_apply(x0, sum_g.back()));
    yg.push_back(symbolic::vf_apply(y01, sum_g.back()));
  }

  Eigen::MatrixXd gf(nf, nf), gg(ng, ng), m(nf, ng);
  Eigen::VectorXd c(nf), w(ng);
  for (Eigen::Index a = 0; a < nf; ++a) {
    c(a) = expect_product(u, yf[a], table);
    for (Eigen::Index b = 0; b <= a; ++b)
      gf(a, b) = gf(b, a) = expect_product(yf[a], yf[b], table) + expect_product(xf[a], xf[b], table);
    for (Eigen::Index l = 0; l < ng; ++l) m(a, l) = expect_product(af[a], sum_g[l], table);
  }
  for (Eigen::Index l = 0; l < ng; ++l) {
    w(l) = expect_product(wa, sum_g[l], table);
    for (Eigen::Index k = 0; k <= l; ++k)
      gg(l, k) = gg(k, l) = expect_product(yg[l], yg[k], table) + expect_product(xg[l], xg[k], table);
  }
  const double u2 = expect_product(u, u, table);

  const PseudoInverse gg_inv = pseudo_inverse(gg);
  const Eigen::MatrixXd coupling = m * gg_inv.inverse;
  const Eigen::MatrixXd reduced = gamma * gf + (4.0 / gamma) * coupling * m.transpose();
  const Eigen::VectorXd rhs = gamma * c + (4.0 / gamma) * coupling * w;
  const PseudoInverse reduced_inv = pseudo_inverse(reduced);
  const Eigen::VectorXd a = reduced_inv.inverse * rhs;
  const Eigen::VectorXd v = w - m.transpose() * a;
  const Eigen::VectorXd b = (2.0 / gamma) * gg_inv.inverse * v;

  SaddleSolution s;
  s.gamma = gamma;
  s.beta = table.beta();
  s.value = 0.5 * gamma * (u2 - 2.0 * a.dot(c) + a.dot(gf * a)) + (2.0 / gamma) * v.dot(gg_inv.inverse * v);
  s.kappa_hat = table.beta() * table.beta() * s.value;
  s.f_coeffs = a;
  s.g_coeffs = b;
  s.f = P(mode);
  s.g = P(mode);
  for (Eigen::Index k = 0; k < nf; ++k) {
    s.f += f_basis[static_cast<std::size_t>(k)] * a(k);
    s.f_basis.push_back(f_basis[static_cast<std::size_t>(k)].str());
  }
  for (Eigen::Index k = 0; k < ng; ++k) {
    s.g += g_basis[static_cast<std::size_t>(k)] * b(k);
    s.g_basis.push_back(g_basis[static_cast<std::size_t>(k)].str());
  }
  const PseudoInverse gf_inv = pseudo_inverse(gf);
  s.cond_f = gf_inv.cond;
  s.rank_f = gf_inv.rank;
  s.cond_g = gg_inv.cond;
  s.rank_g = gg_inv.rank;
  s.cond_reduced = reduced_inv.cond;
  s.rank_reduced = reduced_inv.rank;
  s.rank_deficient = s.rank_f < nf || s.rank_g < ng || s.rank_reduced < nf;
  if (ng > 0) {
    const Eigen::VectorXd projected = gg * (gg_inv.inverse * v);
    s.null_residual = (v - projected).norm();
  }
  return s;
}

SaddleSolution solve_saddle(const Potential& potential, double beta, double gamma, int window,
                            int degree) {
  if (window < 1) throw Error("solve_saddle: window must be at least 1");
  if (degree < 1) throw Error("solve_saddle: degree must be at least 1");
  const Mode mode = potential.is_harmonic() ? Mode::harmonic : Mode::general;
  const MomentTable table(potential, beta, std::max(8, 2 * degree + 2));
  auto centered_basis = [&](bool even) {
    std::vector<RealPolynomial> out;
    for (const auto& m : trial_monomials(window, degree, even)) {
      RealPolynomial phi = RealPolynomial::monomial(m, 1.0, mode);
      const double mean = expect(phi, table);
      if (mean != 0.0) phi -= RealPolynomial::constant(mean, mode);
      out.push_back(std::move(phi));
    }
    return out;
  };
  SaddleSolution s = solve_saddle(table, mode, gamma, centered_basis(true), centered_basis(false), window + 1);
  s.window = window;
  s.degree = degree;
  return s;
}

std::vector<MonotoneRow> certify_monotone(const Potential& potential, double beta, double gamma,
                                          const std::vector<int>& windows, int degree) {
  if (windows.size() < 2) throw Error("certify_monotone: need at least two windows");
  std::vector<int> sorted = windows;
  std::sort(sorted.begin(), sorted.end());
  std::vector<MonotoneRow> rows;
  for (int k : sorted) {
    const SaddleSolution s = solve_saddle(potential, beta, gamma, k, degree);
    if (!rows.empty() && s.kappa_hat > rows.back().kappa_hat + 1e-10 * std::max(1.0, rows.back().kappa_hat)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "Galerkin estimate increased from " << rows.back().kappa_hat << " (window "
          << rows.back().window << ") to " << s.kappa_hat << " (window " << k << ")";
      throw Error(msg.str());
    }
    rows.push_back({k, degree, s.kappa_hat});
  }
  return rows;
}

}  // namespace chainlab
