#include "qys/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace qys {

namespace {

// Nibble packing of a multi-index; valid for nvars <= 16 and per-component
// sums below 16, which covers every supported (nvars, order) combination.
std::uint64_t pack(const MultiIndex& mi) {
  std::uint64_t k = 0;
  for (std::size_t i = 0; i < mi.size(); ++i) {
    k |= static_cast<std::uint64_t>(mi[i]) << (4 * i);
  }
  return k;
}

void enumerate(int nvars, int order, int var, int remaining, MultiIndex& cur,
               std::vector<MultiIndex>& out) {
  if (var == nvars - 1) {
    cur[var] = remaining;
    out.push_back(cur);
    return;
  }
  for (int a = remaining; a >= 0; --a) {
    cur[var] = a;
    enumerate(nvars, order, var + 1, remaining - a, cur, out);
  }
  cur[var] = 0;
}

}  // namespace

int multi_index_degree(const MultiIndex& mi) {
  int d = 0;
  for (int a : mi) d += a;
  return d;
}

double multi_index_factorial(const MultiIndex& mi) {
  double f = 1.0;
  for (int a : mi) {
    for (int j = 2; j <= a; ++j) f *= j;
  }
  return f;
}

JetSpace::JetSpace(int nvars, int order) : nvars_(nvars), order_(order) {
  if (nvars < 1 || nvars > 16) throw Error("jet space: nvars must be in 1..16");
  if (order < 0 || order > 7) throw Error("jet space: order must be in 0..7");
  MultiIndex cur(nvars, 0);
  degree_offsets_.push_back(0);
  for (int d = 0; d <= order; ++d) {
    enumerate(nvars, order, 0, d, cur, indices_);
    degree_offsets_.push_back(static_cast<int>(indices_.size()));
  }
  keys_.reserve(indices_.size());
  degrees_.reserve(indices_.size());
  for (int pos = 0; pos < static_cast<int>(indices_.size()); ++pos) {
    keys_.push_back(pack(indices_[pos]));
    degrees_.push_back(multi_index_degree(indices_[pos]));
    lookup_.emplace(keys_.back(), pos);
  }
}

std::shared_ptr<const JetSpace> JetSpace::get(int nvars, int order) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const JetSpace>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{nvars, order}];
  if (!slot) slot.reset(new JetSpace(nvars, order));
  return slot;
}

int JetSpace::position(const MultiIndex& mi) const {
  if (static_cast<int>(mi.size()) != nvars_)
    throw Error("jet space: multi-index arity mismatch");
  if (multi_index_degree(mi) > order_) return -1;
  return position_of_key(pack(mi));
}

int JetSpace::position_of_key(std::uint64_t key) const {
  auto it = lookup_.find(key);
  return it == lookup_.end() ? -1 : it->second;
}

Jet::Jet(std::shared_ptr<const JetSpace> space)
    : space_(std::move(space)), c_(space_->size(), 0.0) {}

Jet Jet::constant(std::shared_ptr<const JetSpace> space, double v) {
  Jet j(std::move(space));
  j.c_[0] = v;
  return j;
}

Jet Jet::variable(std::shared_ptr<const JetSpace> space, int var, double v) {
  Jet j(std::move(space));
  j.c_[0] = v;
  if (j.order() >= 1) {
    MultiIndex mi(j.nvars(), 0);
    mi[var] = 1;
    j.c_[j.space_->position(mi)] = 1.0;
  }
  return j;
}

double Jet::coeff(const MultiIndex& mi) const {
  int pos = space_->position(mi);
  if (pos < 0)
    throw OrderError("jet: requested coefficient degree exceeds jet order");
  return c_[pos];
}

double Jet::derivative(const MultiIndex& mi) const {
  return coeff(mi) * multi_index_factorial(mi);
}

Jet Jet::truncated(int new_order) const {
  if (new_order >= order()) return *this;
  Jet r(JetSpace::get(nvars(), new_order));
  std::copy(c_.begin(), c_.begin() + r.c_.size(), r.c_.begin());
  return r;
}

namespace {

// Binary ops truncate to the lower of the two orders; intermediate results
// in the geometry pipeline lose one order per differentiation.
std::pair<Jet, Jet> align(const Jet& a, const Jet& b) {
  if (a.nvars() != b.nvars()) throw Error("jet: variable-count mismatch");
  int k = std::min(a.order(), b.order());
  return {a.truncated(k), b.truncated(k)};
}

}  // namespace

Jet Jet::operator-() const {
  Jet r = *this;
  for (double& x : r.c_) x = -x;
  return r;
}

Jet operator+(const Jet& a, const Jet& b) {
  auto [x, y] = align(a, b);
  for (std::size_t i = 0; i < x.c_.size(); ++i) x.c_[i] += y.c_[i];
  return x;
}

Jet operator-(const Jet& a, const Jet& b) {
  auto [x, y] = align(a, b);
  for (std::size_t i = 0; i < x.c_.size(); ++i) x.c_[i] -= y.c_[i];
  return x;
}

Jet operator*(const Jet& a, const Jet& b) {
  auto [x, y] = align(a, b);
  const JetSpace& sp = x.space();
  Jet r(x.space_ptr());
  int order = sp.order();
  for (int pa = 0; pa < sp.size(); ++pa) {
    double ca = x.c_[pa];
    if (ca == 0.0) continue;
    int da = sp.degree(pa);
    std::uint64_t ka = sp.key(pa);
    int bend = sp.degree_end(order - da);
    for (int pb = 0; pb < bend; ++pb) {
      double cb = y.c_[pb];
      if (cb == 0.0) continue;
      r.c_[sp.position_of_key(ka + sp.key(pb))] += ca * cb;
    }
  }
  return r;
}

Jet operator/(const Jet& a, const Jet& b) { return a * jet_reciprocal(b); }

Jet operator+(const Jet& a, double s) {
  Jet r = a;
  r.raw(0) += s;
  return r;
}
Jet operator+(double s, const Jet& a) { return a + s; }
Jet operator-(const Jet& a, double s) { return a + (-s); }
Jet operator-(double s, const Jet& a) { return (-a) + s; }
Jet operator*(const Jet& a, double s) {
  Jet r = a;
  for (int i = 0; i < r.space().size(); ++i) r.raw(i) *= s;
  return r;
}
Jet operator*(double s, const Jet& a) { return a * s; }
Jet operator/(const Jet& a, double s) {
  if (s == 0.0) throw DomainError("division by zero");
  return a * (1.0 / s);
}
Jet operator/(double s, const Jet& a) { return jet_reciprocal(a) * s; }

Jet jet_compose(const Jet& u, std::span<const double> series) {
  // Horner evaluation of sum_j series[j] * w^j with w = u - u.value().
  Jet w = u;
  w.c_[0] = 0.0;
  int k = u.order();
  Jet r = Jet::constant(u.space_ptr(), series[k]);
  for (int j = k - 1; j >= 0; --j) {
    r = r * w;
    r.c_[0] += series[j];
  }
  return r;
}

Jet jet_partial(const Jet& j, int var) {
  if (j.order() == 0)
    throw OrderError("jet: cannot differentiate an order-0 jet");
  const JetSpace& sp = j.space();
  Jet r(JetSpace::get(sp.nvars(), sp.order() - 1));
  const JetSpace& rs = r.space();
  for (int pos = 0; pos < rs.size(); ++pos) {
    MultiIndex mi = rs.index(pos);
    mi[var] += 1;
    r.c_[pos] = j.c_[sp.position(mi)] * mi[var];
  }
  return r;
}

Jet jet_exp(const Jet& u) {
  int k = u.order();
  std::vector<double> s(k + 1);
  s[0] = std::exp(u.value());
  for (int j = 1; j <= k; ++j) s[j] = s[j - 1] / j;
  return jet_compose(u, s);
}

Jet jet_ln(const Jet& u) {
  double c = u.value();
  if (c <= 0.0) throw DomainError("ln of non-positive argument");
  int k = u.order();
  std::vector<double> s(k + 1);
  s[0] = std::log(c);
  double inv = 1.0 / c;
  double p = inv;
  for (int j = 1; j <= k; ++j) {
    s[j] = (j % 2 == 1 ? 1.0 : -1.0) * p / j;
    p *= inv;
  }
  return jet_compose(u, s);
}

Jet jet_sqrt(const Jet& u) {
  double c = u.value();
  if (c <= 0.0) throw DomainError("sqrt of non-positive argument");
  int k = u.order();
  std::vector<double> s(k + 1);
  // s[j] = binom(1/2, j) * c^(1/2 - j)
  s[0] = std::sqrt(c);
  double coef = 1.0;
  double cp = s[0];
  for (int j = 1; j <= k; ++j) {
    coef *= (0.5 - (j - 1)) / j;
    cp /= c;  // cp = c^(1/2 - j)
    s[j] = coef * cp;
  }
  return jet_compose(u, s);
}

Jet jet_reciprocal(const Jet& u) {
  double c = u.value();
  if (c == 0.0) throw DomainError("division by zero");
  int k = u.order();
  std::vector<double> s(k + 1);
  double inv = 1.0 / c;
  double p = inv;
  for (int j = 0; j <= k; ++j) {
    s[j] = p;
    p *= -inv;
  }
  return jet_compose(u, s);
}

namespace {

Jet jet_trig(const Jet& u, double s0, double s1) {
  // Cyclic derivatives: the pair (s0, s1) is (f(c), f'(c)).
  int k = u.order();
  std::vector<double> s(k + 1);
  double fact = 1.0;
  double cyc[4] = {s0, s1, -s0, -s1};
  for (int j = 0; j <= k; ++j) {
    if (j > 0) fact *= j;
    s[j] = cyc[j % 4] / fact;
  }
  return jet_compose(u, s);
}

}  // namespace

Jet jet_sin(const Jet& u) {
  return jet_trig(u, std::sin(u.value()), std::cos(u.value()));
}

Jet jet_cos(const Jet& u) {
  return jet_trig(u, std::cos(u.value()), -std::sin(u.value()));
}

Jet jet_tan(const Jet& u) {
  Jet c = jet_cos(u);
  if (c.value() == 0.0) throw DomainError("tan at a pole of cosine");
  return jet_sin(u) / c;
}

Jet jet_sinh(const Jet& u) {
  int k = u.order();
  std::vector<double> s(k + 1);
  double sh = std::sinh(u.value());
  double ch = std::cosh(u.value());
  double fact = 1.0;
  for (int j = 0; j <= k; ++j) {
    if (j > 0) fact *= j;
    s[j] = (j % 2 == 0 ? sh : ch) / fact;
  }
  return jet_compose(u, s);
}

Jet jet_cosh(const Jet& u) {
  int k = u.order();
  std::vector<double> s(k + 1);
  double sh = std::sinh(u.value());
  double ch = std::cosh(u.value());
  double fact = 1.0;
  for (int j = 0; j <= k; ++j) {
    if (j > 0) fact *= j;
    s[j] = (j % 2 == 0 ? ch : sh) / fact;
  }
  return jet_compose(u, s);
}

Jet jet_tanh(const Jet& u) { return jet_sinh(u) / jet_cosh(u); }

Jet jet_pow_int(const Jet& u, long long p) {
  if (p == 0) return Jet::constant(u.space_ptr(), 1.0);
  bool neg = p < 0;
  unsigned long long e = neg ? -(unsigned long long)p : (unsigned long long)p;
  Jet acc = Jet::constant(u.space_ptr(), 1.0);
  Jet base = u;
  while (e > 0) {
    if (e & 1ull) acc = acc * base;
    e >>= 1;
    if (e > 0) base = base * base;
  }
  return neg ? jet_reciprocal(acc) : acc;
}

Jet jet_pow(const Jet& u, double p) {
  if (p == std::floor(p) && std::abs(p) <= 64.0) {
    return jet_pow_int(u, static_cast<long long>(p));
  }
  if (u.value() <= 0.0)
    throw DomainError("non-integer power of a non-positive base");
  return jet_exp(jet_ln(u) * p);
}

}  // namespace qys
