#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chainlab/chain_state.hpp"
#include "chainlab/potential.hpp"

namespace chainlab::symbolic {

using Rational = boost::multiprecision::number<
    boost::multiprecision::rational_adaptor<boost::multiprecision::cpp_int_backend<>>,
    boost::multiprecision::et_off>;

/// harmonic: V(r) = r^2/2, so V and V' reduce to powers of r and V'' to 1.
/// general: V, V', V'' are kept as opaque letters; V''' is not representable.
enum class Mode { harmonic, general };

/// Letter powers at one site: p^p r^r V(r)^v V'(r)^dv V''(r)^d2v.
struct Letters {
  std::uint8_t p = 0;
  std::uint8_t r = 0;
  std::uint8_t v = 0;
  std::uint8_t dv = 0;
  std::uint8_t d2v = 0;

  bool empty() const { return (p | r | v | dv | d2v) == 0; }
  int r_letters() const { return r + v + dv + d2v; }
  auto operator<=>(const Letters&) const = default;
};

struct Factor {
  int site = 0;
  Letters letters;
  auto operator<=>(const Factor&) const = default;
};

/// Sorted by site, one factor per site, no empty factors. The empty monomial is 1.
using Monomial = std::vector<Factor>;

Monomial multiply(const Monomial& a, const Monomial& b);
int p_degree(const Monomial& m);
int total_degree(const Monomial& m);

/// Sparse polynomial in per-site letters on the infinite lattice. Value semantics.
template <class Coeff>
class Polynomial {
 public:
  using Terms = std::map<Monomial, Coeff>;

  explicit Polynomial(Mode mode = Mode::harmonic) : mode_(mode) {}

  static Polynomial constant(const Coeff& c, Mode mode);
  static Polynomial monomial(const Monomial& m, const Coeff& c, Mode mode);
  static Polynomial p(int site, Mode mode);
  static Polynomial r(int site, Mode mode);
  static Polynomial V(int site, Mode mode);
  static Polynomial dV(int site, Mode mode);
  static Polynomial d2V(int site, Mode mode);

  Mode mode() const { return mode_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  /// Sorted, distinct sites that appear in some term.
  std::vector<int> window() const;

  /// Adds c * m, normalizing letters in harmonic mode and dropping zero terms.
  void add_term(const Monomial& m, const Coeff& c);
  /// Same polynomial re-expressed in another mode (general -> harmonic substitutes V).
  Polynomial in_mode(Mode mode) const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(const Coeff& c);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, const Coeff& c) { return a *= c; }
  friend Polynomial operator*(const Coeff& c, Polynomial a) { return a *= c; }
  friend Polynomial operator-(Polynomial a) { return a *= Coeff(-1); }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) { return a.times(b); }
  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.terms_ == b.terms_; }

  Polynomial times(const Polynomial& other) const;
  /// Every site index translated by k.
  Polynomial shift(int k) const;
  Polynomial diff_p(int site) const;
  /// Throws AlphabetOverflow in general mode when a V'' letter would be differentiated.
  Polynomial diff_r(int site) const;

  /// Canonical text: terms in sorted monomial order, e.g. "1/2 p0^2 + r0 V'(r1)".
  std::string str() const;

  /// Value at a ring state, site indices taken modulo N.
  double evaluate(const ChainState& state, const Potential& potential) const;

 private:
  Mode mode_;
  Terms terms_;
};

using ExactPolynomial = Polynomial<Rational>;
using RealPolynomial = Polynomial<double>;

extern template class Polynomial<Rational>;
extern template class Polynomial<double>;

RealPolynomial to_real(const ExactPolynomial& f);

/// X_i = p_i d/dr_i - V'(r_i) d/dp_i and Y_{i,i+1} = p_i d/dr_{i+1} - V'(r_{i+1}) d/dp_i.
struct VectorField {
  enum class Kind { X, Y };
  Kind kind;
  int site;
};

template <class Coeff>
Polynomial<Coeff> vf_apply(VectorField field, const Polynomial<Coeff>& f);

/// A f = sum_i (X_i - Y_{i,i+1}) f, summed over the fields that touch f's window.
template <class Coeff>
Polynomial<Coeff> antisymmetric_part(const Polynomial<Coeff>& f);
/// S f = (1/2) sum_i (X_i^2 + Y_{i,i+1}^2) f.
template <class Coeff>
Polynomial<Coeff> symmetric_part(const Polynomial<Coeff>& f);
/// L f = A f + gamma S f, with f first converted to `mode`.
template <class Coeff>
Polynomial<Coeff> generator_apply(const Polynomial<Coeff>& f, const Coeff& gamma, Mode mode);
/// tau_1 f - f.
template <class Coeff>
Polynomial<Coeff> gradient(const Polynomial<Coeff>& f);

template <class Coeff>
Polynomial<Coeff> site_energy(int site, Mode mode);
/// -p_i V'(r_{i+1}).
template <class Coeff>
Polynomial<Coeff> current_hamiltonian(int site, Mode mode);
/// (gamma/2) (p_i^2 V''(r_{i+1}) - V'(r_{i+1})^2).
template <class Coeff>
Polynomial<Coeff> current_noise(int site, const Coeff& gamma, Mode mode);

/// Residual of the harmonic current decomposition
///   W_{0,1} + grad[(1/(6g) + g/4) p_0^2 + c r_0 r_1] - L[(p_0 + p_1) r_1 / (6g) + r_1^2 / 4]
/// with c = 1/(6g). Zero for every g > 0.
ExactPolynomial check_fd_identity(const Rational& gamma);

/// Same residual with explicit coefficients of p_0^2 and r_0 r_1 in the gradient term;
/// used for perturbation controls.
ExactPolynomial fd_residual(const Rational& gamma, const Rational& p2_coeff,
                            const Rational& rr_coeff);

}  // namespace chainlab::symbolic
