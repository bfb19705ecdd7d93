#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "chainlab/potential.hpp"
#include "chainlab/symbolic.hpp"

namespace chainlab {

/// Single-site Gibbs moments: <p^a> in closed form and
/// <V'(r)^dv r^r V''(r)^d2v V(r)^v> by quadrature, for total r-letter degree <= max_degree.
class MomentTable {
 public:
  MomentTable(const Potential& potential, double beta, int max_degree = 8);

  double beta() const { return beta_; }
  int max_degree() const { return max_degree_; }

  double mu(int a) const;
  double nu(int dv, int r, int d2v, int v = 0) const;
  /// Moment of one site's letters; throws Error when outside the table.
  double site(const symbolic::Letters& letters) const;

 private:
  std::size_t index(int r, int v, int dv, int d2v) const;

  double beta_;
  int max_degree_;
  std::vector<double> nu_;
};

MomentTable build_moment_table(const Potential& potential, double beta, int max_degree = 8);

/// Gibbs expectation of a polynomial, factorized over sites.
double expect(const symbolic::RealPolynomial& f, const MomentTable& table);
double expect(const symbolic::ExactPolynomial& f, const MomentTable& table);
/// <f g> without forming the product polynomial.
double expect_product(const symbolic::RealPolynomial& f, const symbolic::RealPolynomial& g,
                      const MomentTable& table);

/// Monomials in p_j, r_j on sites 0..window, total degree 1..degree, one representative
/// per translation class (lowest site 0), with even (f space) or odd (g space) p-degree.
std::vector<symbolic::Monomial> trial_monomials(int window, int degree, bool even_in_p);

/// Throws Error if some f element is odd in p or some g element is even in p.
void check_parity(const std::vector<symbolic::RealPolynomial>& f_basis,
                  const std::vector<symbolic::RealPolynomial>& g_basis);

struct SaddleSolution {
  double kappa_hat = 0.0;
  double value = 0.0;  // kappa_hat / beta^2
  Eigen::VectorXd f_coeffs;
  Eigen::VectorXd g_coeffs;
  symbolic::RealPolynomial f;
  symbolic::RealPolynomial g;
  std::vector<std::string> f_basis;
  std::vector<std::string> g_basis;
  int window = 0;
  int degree = 0;
  double beta = 0.0;
  double gamma = 0.0;
  // Conditioning of the Gram blocks (ratio of extreme retained eigenvalues);
  // rank drops mean a pseudo-inverse was used.
  double cond_f = 0.0;
  double cond_g = 0.0;
  double cond_reduced = 0.0;
  int rank_f = 0;
  int rank_g = 0;
  int rank_reduced = 0;
  bool rank_deficient = false;
  double null_residual = 0.0;  // part of the g-pairing vector outside range(G_g)
};

SaddleSolution solve_saddle(const Potential& potential, double beta, double gamma, int window,
                            int degree);

/// Saddle problem over explicit trial families. `gamma_range` bounds the translates
/// kept in the truncated sum over shifts; it must cover the widest basis element.
SaddleSolution solve_saddle(const MomentTable& table, symbolic::Mode mode, double gamma,
                            const std::vector<symbolic::RealPolynomial>& f_basis,
                            const std::vector<symbolic::RealPolynomial>& g_basis,
                            int gamma_range);

struct MonotoneRow {
  int window = 0;
  int degree = 0;
  double kappa_hat = 0.0;
};

/// kappa_hat over nested windows; throws Error if it increases by more than 1e-10.
std::vector<MonotoneRow> certify_monotone(const Potential& potential, double beta, double gamma,
                                          const std::vector<int>& windows, int degree = 2);

}  // namespace chainlab
