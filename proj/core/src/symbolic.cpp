#include "chainlab/symbolic.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "chainlab/csv.hpp"
#include "chainlab/error.hpp"

namespace chainlab::symbolic {

namespace {

std::uint8_t add_power(std::uint8_t a, std::uint8_t b) {
  const int s = a + b;
  if (s > 255) throw AlphabetOverflow("letter power exceeds 255");
  return static_cast<std::uint8_t>(s);
}

Letters add_letters(const Letters& a, const Letters& b) {
  return {add_power(a.p, b.p), add_power(a.r, b.r), add_power(a.v, b.v), add_power(a.dv, b.dv),
          add_power(a.d2v, b.d2v)};
}

template <class Coeff>
Coeff half_power(int e) {
  Coeff c(1);
  for (int k = 0; k < e; ++k) c /= Coeff(2);
  return c;
}

double to_double(const Rational& c) { return static_cast<double>(c); }
double to_double(double c) { return c; }

bool is_negative(const Rational& c) { return c < 0; }
bool is_negative(double c) { return c < 0.0; }

std::string magnitude_text(const Rational& c) {
  Rational a = c < 0 ? Rational(-c) : c;
  return a.str();
}
std::string magnitude_text(double c) { return format_double(std::abs(c)); }

bool is_one(const Rational& c) { return c == 1 || c == -1; }
bool is_one(double c) { return c == 1.0 || c == -1.0; }

std::string letter_text(const char* name, int site, int power, bool wrap) {
  if (power == 0) return {};
  std::ostringstream out;
  if (wrap) out << name << "(r" << site << ")";
  else out << name << site;
  if (power > 1) out << '^' << power;
  return out.str();
}

double ipow(double x, int e) {
  double out = 1.0;
  for (int k = 0; k < e; ++k) out *= x;
  return out;
}

}  // namespace

Monomial multiply(const Monomial& a, const Monomial& b) {
  Monomial out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].site < b[j].site)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].site < a[i].site) {
      out.push_back(b[j++]);
    } else {
      out.push_back({a[i].site, add_letters(a[i].letters, b[j].letters)});
      ++i;
      ++j;
    }
  }
  return out;
}

int p_degree(const Monomial& m) {
  int d = 0;
  for (const auto& f : m) d += f.letters.p;
  return d;
}

int total_degree(const Monomial& m) {
  int d = 0;
  for (const auto& f : m) d += f.letters.p + f.letters.r_letters();
  return d;
}

template <class Coeff>
Polynomial<Coeff> Polynomial<Coeff>::constant(const Coeff& c, Mode mode) {
  return monomial({}, c, mode);
}

template <class Coeff>
Polynomial<Coeff> Polynomial<Coeff>::monomial(const Monomial& m, const Coeff& c, Mode mode) {
  Polynomial out(mode);
  out.add_term(m, c);
  return out;
}

template <class Coeff>
Polynomial<Coeff> Polynomial<Coeff>::p(int site, Mode mode) {
  Letters l;
  l.p = 1;
  return monomial({{site, l}}, Coeff(1), mode);
}

template <class Coeff>
Polynomial<Coeff> Polynomial<Coeff>::r(int site, Mode mode) {
  Letters l;
  l.r = 1;
  return monomial({{site, l}}, Coeff(1), mode);
}

template <class Coeff>
Polynomial<Coeff> Polynomial<Coeff>::V(int site, Mode mode) {
  Letters l;
  l.v = 1;
  return monomial({{site, l}}, Coeff(1), mode);
}

template <class Coeff>
Polynomial<Coeff> Polynomial<Coeff>::dV(int site, Mode mode) {
  Letters l;
  l.dv = 1;
  return monomial({{site, l}}, Coeff(1), mode);
}

template <class Coeff>
Polynomial<Coeff> Polynomial<Coeff>::d2V(int site, Mode mode) {
  Letters l;
  l.d2v = 1;
  return monomial({{site, l}}, Coeff(1), mode);
}

template <class Coeff>
std::vector<int> Polynomial<Coeff>::window() const {
  std::set<int> sites;
  for (const auto& [m, c] : terms_)
    for (const auto& f : m) sites.insert(f.site);
  return {sites.begin(), sites.end()};
}

template <class Coeff>
void Polynomial<Coeff>::add_term(const Monomial& m, const Coeff& c) {
  if (c == Coeff(0)) return;
  Monomial key;
  key.reserve(m.size());
  Coeff coeff = c;
  for (const auto& f : m) {
    Letters l = f.letters;
    if (mode_ == Mode::harmonic) {
      coeff *= half_power<Coeff>(l.v);
      l.r = add_power(l.r, add_power(add_power(l.v, l.v), l.dv));
      l.v = l.dv = l.d2v = 0;
    }
    if (l.empty()) continue;
    if (!key.empty() && key.back().site >= f.site) throw Error("monomial factors must be sorted by site");
    key.push_back({f.site, l});
  }
  auto [it, inserted] = terms_.try_emplace(std::move(key), coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == Coeff(0)) terms_.erase(it);
  }
}

template <class Coeff>
Polynomial<Coeff> Polynomial<Coeff>::in_mode(Mode mode) const {
  if (mode == mode_) return *this;
  if (mode == Mode::general) throw Error("harmonic polynomials cannot be lifted to general mode");
  Polynomial out(mode);
  for (const auto& [m, c] : terms_) out.add_term(m, c);
  return out;
}

template <class Coeff>
Polynomial<Coeff>& Polynomial<Coeff>::operator+=(const Polynomial& other) {
  if (other.mode_ != mode_) throw Error("polynomial mode mismatch");
  for (const auto& [m, c] : other.terms_) {
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == Coeff(0)) terms_.erase(it);
    }
  }
  return *this;
}

template <class Coeff>
Polynomial<Coeff>& Polynomial<Coeff>::operator-=(const Polynomial& other) {
  if (other.mode_ != mode_) throw Error("polynomial mode mismatch");
  for (const auto& [m, c] : other.terms_) {
    auto [it, inserted] = terms_.try_emplace(m, -c);
    if (!inserted) {
      it->second -= c;
      if (it->second == Coeff(0)) terms_.erase(it);
    }
  }
  return *this;
}

template <class Coeff>
Polynomial<Coeff>& Polynomial<Coeff>::operator*=(const Coeff& c) {
  if (c == Coeff(0)) {
    terms_.clear();
    return *this;
  }
  for (auto& [m, v] : terms_) v *= c;
  return *this;
}

template <class Coeff>
Polynomial<Coeff> Polynomial<Coeff>::times(const Polynomial& other) const {
  if (other.mode_ != mode_) throw Error("polynomial mode mismatch");
  Polynomial out(mode_);
  for (const auto& [ma, ca] : terms_)
    for (const auto& [mb, cb] : other.terms_) out.add_term(multiply(ma, mb), ca * cb);
  return out;
}

template <class Coeff>
Polynomial<Coeff> Polynomial<Coeff>::shift(int k) const {
  Polynomial out(mode_);
  for (const auto& [m, c] : terms_) {
    Monomial moved = m;
    for (auto& f : moved) f.site += k;
    out.terms_.emplace(std::move(moved), c);
  }
  return out;
}

template <class Coeff>
Polynomial<Coeff> Polynomial<Coeff>::diff_p(int site) const {
  Polynomial out(mode_);
  for (const auto& [m, c] : terms_) {
    for (std::size_t k = 0; k < m.size(); ++k) {
      if (m[k].site != site || m[k].letters.p == 0) continue;
      Monomial d = m;
      const int power = d[k].letters.p;
      d[k].letters.p -= 1;
      if (d[k].letters.empty()) d.erase(d.begin() + static_cast<std::ptrdiff_t>(k));
      out.add_term(d, c * Coeff(power));
    }
  }
  return out;
}

template <class Coeff>
Polynomial<Coeff> Polynomial<Coeff>::diff_r(int site) const {
  Polynomial out(mode_);
  for (const auto& [m, c] : terms_) {
    for (std::size_t k = 0; k < m.size(); ++k) {
      if (m[k].site != site) continue;
      const Letters l = m[k].letters;
      if (l.d2v > 0) {
        if (mode_ == Mode::general)
          throw AlphabetOverflow("differentiating V''(r" + std::to_string(site) +
                                 ") needs V''', which is outside the alphabet");
      }
      auto emit = [&](Letters nl, int power) {
        Monomial d = m;
        d[k].letters = nl;
        if (nl.empty()) d.erase(d.begin() + static_cast<std::ptrdiff_t>(k));
        out.add_term(d, c * Coeff(power));
      };
      if (l.r > 0) {
        Letters nl = l;
        nl.r -= 1;
        emit(nl, l.r);
      }
      if (l.v > 0) {
        Letters nl = l;
        nl.v -= 1;
        nl.dv = add_power(nl.dv, 1);
        emit(nl, l.v);
      }
      if (l.dv > 0) {
        Letters nl = l;
        nl.dv -= 1;
        nl.d2v = add_power(nl.d2v, 1);
        emit(nl, l.dv);
      }
    }
  }
  return out;
}

template <class Coeff>
std::string Polynomial<Coeff>::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream out;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    const bool neg = is_negative(c);
    if (first) out << (neg ? "-" : "");
    else out << (neg ? " - " : " + ");
    first = false;
    std::vector<std::string> parts;
    if (m.empty() || !is_one(c)) parts.push_back(magnitude_text(c));
    for (const auto& f : m) {
      for (auto s : {letter_text("p", f.site, f.letters.p, false), letter_text("r", f.site, f.letters.r, false),
                     letter_text("V", f.site, f.letters.v, true), letter_text("V'", f.site, f.letters.dv, true),
                     letter_text("V''", f.site, f.letters.d2v, true)})
        if (!s.empty()) parts.push_back(std::move(s));
    }
    for (std::size_t k = 0; k < parts.size(); ++k) out << (k ? " " : "") << parts[k];
  }
  return out.str();
}

template <class Coeff>
double Polynomial<Coeff>::evaluate(const ChainState& state, const Potential& potential) const {
  double total = 0.0;
  for (const auto& [m, c] : terms_) {
    double term = to_double(c);
    for (const auto& f : m) {
      const std::size_t i = state.wrap(f.site);
      const double r = state.r[i];
      const Letters& l = f.letters;
      term *= ipow(state.p[i], l.p) * ipow(r, l.r);
      if (l.v) term *= ipow(potential.V(r), l.v);
      if (l.dv) term *= ipow(potential.dV(r), l.dv);
      if (l.d2v) term *= ipow(potential.d2V(r), l.d2v);
    }
    total += term;
  }
  return total;
}

template class Polynomial<Rational>;
template class Polynomial<double>;

RealPolynomial to_real(const ExactPolynomial& f) {
  RealPolynomial out(f.mode());
  for (const auto& [m, c] : f.terms()) out.add_term(m, static_cast<double>(c));
  return out;
}

template <class Coeff>
Polynomial<Coeff> vf_apply(VectorField field, const Polynomial<Coeff>& f) {
  using P = Polynomial<Coeff>;
  const Mode mode = f.mode();
  const int i = field.site;
  const int j = field.kind == VectorField::Kind::X ? i : i + 1;
  return P::p(i, mode) * f.diff_r(j) - P::dV(j, mode) * f.diff_p(i);
}

namespace {

template <class Coeff>
void field_sites(const Polynomial<Coeff>& f, std::vector<int>& xs, std::vector<int>& ys) {
  const auto w = f.window();
  xs = w;
  std::set<int> y(w.begin(), w.end());
  for (int s : w) y.insert(s - 1);
  ys.assign(y.begin(), y.end());
}

}  // namespace

template <class Coeff>
Polynomial<Coeff> antisymmetric_part(const Polynomial<Coeff>& f) {
  std::vector<int> xs, ys;
  field_sites(f, xs, ys);
  Polynomial<Coeff> out(f.mode());
  for (int i : xs) out += vf_apply({VectorField::Kind::X, i}, f);
  for (int i : ys) out -= vf_apply({VectorField::Kind::Y, i}, f);
  return out;
}

template <class Coeff>
Polynomial<Coeff> symmetric_part(const Polynomial<Coeff>& f) {
  std::vector<int> xs, ys;
  field_sites(f, xs, ys);
  Polynomial<Coeff> out(f.mode());
  for (int i : xs) {
    const VectorField x{VectorField::Kind::X, i};
    out += vf_apply(x, vf_apply(x, f));
  }
  for (int i : ys) {
    const VectorField y{VectorField::Kind::Y, i};
    out += vf_apply(y, vf_apply(y, f));
  }
  return out * (Coeff(1) / Coeff(2));
}

template <class Coeff>
Polynomial<Coeff> generator_apply(const Polynomial<Coeff>& f, const Coeff& gamma, Mode mode) {
  const Polynomial<Coeff> g = f.in_mode(mode);
  return antisymmetric_part(g) + symmetric_part(g) * gamma;
}

template <class Coeff>
Polynomial<Coeff> gradient(const Polynomial<Coeff>& f) {
  return f.shift(1) - f;
}

template <class Coeff>
Polynomial<Coeff> site_energy(int site, Mode mode) {
  using P = Polynomial<Coeff>;
  return P::p(site, mode) * P::p(site, mode) * (Coeff(1) / Coeff(2)) + P::V(site, mode);
}

template <class Coeff>
Polynomial<Coeff> current_hamiltonian(int site, Mode mode) {
  using P = Polynomial<Coeff>;
  return -(P::p(site, mode) * P::dV(site + 1, mode));
}

template <class Coeff>
Polynomial<Coeff> current_noise(int site, const Coeff& gamma, Mode mode) {
  using P = Polynomial<Coeff>;
  const P p = P::p(site, mode);
  const P force = P::dV(site + 1, mode);
  return (p * p * P::d2V(site + 1, mode) - force * force) * (gamma / Coeff(2));
}

#define CHAINLAB_INSTANTIATE(C)                                                        \
  template Polynomial<C> vf_apply(VectorField, const Polynomial<C>&);                  \
  template Polynomial<C> antisymmetric_part(const Polynomial<C>&);                     \
  template Polynomial<C> symmetric_part(const Polynomial<C>&);                         \
  template Polynomial<C> generator_apply(const Polynomial<C>&, const C&, Mode);        \
  template Polynomial<C> gradient(const Polynomial<C>&);                               \
  template Polynomial<C> site_energy<C>(int, Mode);                                    \
  template Polynomial<C> current_hamiltonian<C>(int, Mode);                            \
  template Polynomial<C> current_noise<C>(int, const C&, Mode);

CHAINLAB_INSTANTIATE(Rational)
CHAINLAB_INSTANTIATE(double)
#undef CHAINLAB_INSTANTIATE

ExactPolynomial fd_residual(const Rational& gamma, const Rational& p2_coeff,
                            const Rational& rr_coeff) {
  using P = ExactPolynomial;
  const Mode h = Mode::harmonic;
  const Rational sixth = Rational(1) / (Rational(6) * gamma);
  const P grad_term = P::p(0, h) * P::p(0, h) * p2_coeff + P::r(0, h) * P::r(1, h) * rr_coeff;
  const P local = (P::p(0, h) + P::p(1, h)) * P::r(1, h) * sixth +
                  P::r(1, h) * P::r(1, h) * (Rational(1) / Rational(4));
  const P current = current_hamiltonian<Rational>(0, h) + current_noise<Rational>(0, gamma, h);
  return current + gradient(grad_term) - generator_apply(local, gamma, h);
}

ExactPolynomial check_fd_identity(const Rational& gamma) {
  if (gamma <= 0) throw Error("check_fd_identity: gamma must be positive");
  const Rational sixth = Rational(1) / (Rational(6) * gamma);
  return fd_residual(gamma, sixth + gamma / Rational(4), sixth);
}

}  // namespace chainlab::symbolic
