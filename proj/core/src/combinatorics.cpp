#include "fgdim/combinatorics.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "fgdim/errors.hpp"
#include "fgdim/process_core.hpp"

namespace fgdim {

namespace {

std::vector<std::string_view> split_tokens(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == ',')) ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ' && text[j] != '\t' && text[j] != ',') ++j;
    if (j > i) out.push_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join(const std::vector<std::size_t>& v, int offset) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(v[i] + offset);
  }
  return s;
}

}  // namespace

SignVector::SignVector(std::vector<Entry> entries) : entries_(std::move(entries)) {
  if (entries_.size() < 2 || entries_.size() % 2 != 0) {
    throw DomainError("SignVector: length must be even and >= 2");
  }
}

SignVector SignVector::from_signs(std::span<const int> signs) {
  std::vector<Entry> e;
  int total = 0;
  for (int s : signs) {
    if (s != 1 && s != -1) throw DomainError("SignVector: entries of A_2q must be +1 or -1");
    total += s;
    e.emplace_back(s);
  }
  if (total != 0) throw DomainError("SignVector: entries of A_2q must sum to zero");
  return SignVector(std::move(e));
}

SignVector SignVector::parse(std::string_view text) {
  std::vector<Entry> e;
  for (auto tok : split_tokens(text)) {
    if (tok == "*") {
      e.emplace_back(std::nullopt);
    } else if (tok == "+") {
      e.emplace_back(1);
    } else if (tok == "-") {
      e.emplace_back(-1);
    } else {
      int v = 0;
      const char* first = tok.data();
      if (!tok.empty() && tok.front() == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw DomainError("SignVector: bad token '" + std::string(tok) + "'");
      }
      e.emplace_back(v);
    }
  }
  return SignVector(std::move(e));
}

std::size_t SignVector::star_count() const noexcept {
  return std::size_t(std::count(entries_.begin(), entries_.end(), std::nullopt));
}

std::vector<int> SignVector::numeric() const {
  std::vector<int> v(entries_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = entries_[i].value_or(0);
  return v;
}

std::string SignVector::to_string() const {
  std::string s;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (i) s += ' ';
    if (!entries_[i]) {
      s += '*';
    } else if (*entries_[i] == 1) {
      s += '+';
    } else if (*entries_[i] == -1) {
      s += '-';
    } else {
      s += std::to_string(*entries_[i]);
    }
  }
  return s;
}

OperatorSeq::OperatorSeq(std::vector<Op> ops) : ops_(std::move(ops)) {
  if (ops_.empty()) throw DomainError("OperatorSeq: length must be >= 1");
}

OperatorSeq OperatorSeq::parse(std::string_view text) {
  std::vector<Op> ops;
  for (auto tok : split_tokens(text)) {
    if (tok == "P-") {
      ops.push_back(Op::PhiMinus);
    } else if (tok == "P+") {
      ops.push_back(Op::PhiPlus);
    } else if (tok == "D") {
      ops.push_back(Op::Del);
    } else {
      throw DomainError("OperatorSeq: bad token '" + std::string(tok) + "'");
    }
  }
  return OperatorSeq(std::move(ops));
}

std::size_t OperatorSeq::count(Op op) const noexcept {
  return std::size_t(std::count(ops_.begin(), ops_.end(), op));
}

std::vector<std::size_t> OperatorSeq::indices_of(Op op) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < ops_.size(); ++k) {
    if (ops_[k] == op) out.push_back(k);
  }
  return out;
}

std::string OperatorSeq::to_string() const {
  std::string s;
  for (std::size_t k = 0; k < ops_.size(); ++k) {
    if (k) s += ' ';
    s += ops_[k] == Op::PhiMinus ? "P-" : ops_[k] == Op::PhiPlus ? "P+" : "D";
  }
  return s;
}

std::vector<SignVector> enumerate_A(int q) {
  if (q < 1) throw DomainError("enumerate_A: q must be >= 1");
  if (q > kMaxEnumerationQ) {
    throw ResourceError("enumerate_A: q = " + std::to_string(q) + " exceeds ceiling " +
                        std::to_string(kMaxEnumerationQ));
  }
  const int n = 2 * q;
  std::vector<SignVector> out;
  std::vector<int> cur(n);
  // Bit b of mask set means +1; the most significant bit is position 0, so
  // increasing masks give lexicographic order with -1 < +1.
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != q) continue;
    for (int i = 0; i < n; ++i) cur[i] = (mask >> (n - 1 - i)) & 1u ? 1 : -1;
    out.push_back(SignVector::from_signs(cur));
  }
  return out;
}

std::vector<OperatorSeq> enumerate_Omega(int q) {
  if (q < 1) throw DomainError("enumerate_Omega: q must be >= 1");
  if (q > kMaxEnumerationQ) {
    throw ResourceError("enumerate_Omega: q = " + std::to_string(q) + " exceeds ceiling " +
                        std::to_string(kMaxEnumerationQ));
  }
  std::size_t total = 1;
  for (int i = 0; i < q; ++i) total *= 3;
  std::vector<OperatorSeq> out;
  out.reserve(total);
  std::vector<Op> ops(q);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (int k = q - 1; k >= 0; --k) {
      ops[k] = static_cast<Op>(c % 3);
      c /= 3;
    }
    out.emplace_back(ops);
  }
  return out;
}

SignVector apply_phi(const SignVector& eps, std::size_t pos, PhiSign sign) {
  const std::size_t n = eps.size();
  if (pos >= n) throw PreconditionError("apply_phi: position out of range");
  if (eps.is_star(pos)) throw PreconditionError("apply_phi: target entry is *");
  if (*eps[pos] == 0) throw PreconditionError("apply_phi: target entry is 0");
  std::vector<SignVector::Entry> e(eps.entries().begin(), eps.entries().end());
  const bool boundary = sign == PhiSign::Minus ? pos == 0 : pos + 1 == n;
  if (!boundary) {
    const std::size_t recv = sign == PhiSign::Minus ? pos - 1 : pos + 1;
    if (!e[recv]) throw PreconditionError("apply_phi: receiving entry is *");
    e[recv] = *e[recv] + *e[pos];
  }
  e[pos] = std::nullopt;
  return SignVector(std::move(e));
}

std::string ReductionSummary::to_string() const {
  std::ostringstream os;
  os << "reduced=" << reduced.to_string() << "; I=" << I() << "; a=";
  for (std::size_t i = 0; i < coeffs.size(); ++i) os << (i ? " " : "") << coeffs[i];
  os << "; origin=" << origin_coeff << "; j=" << join(nontrivial_indices, 1)
     << "; p=" << join(diff_positions, 1) << "; i=" << join(zero_sum_indices, 1)
     << "; jstar=" << join(jstar, 1) << "; m=" << m << "; l=" << ell << "; q=" << q;
  return os.str();
}

ReductionSummary reduce(const SignVector& eps, const OperatorSeq& sigma) {
  if (eps.size() != 2 * sigma.q()) {
    throw PreconditionError("reduce: sign vector length must be 2q");
  }
  int total = 0;
  for (const auto& e : eps.entries()) {
    if (!e || (*e != 1 && *e != -1)) throw DomainError("reduce: sign vector must lie in A_2q");
    total += *e;
  }
  if (total != 0) throw DomainError("reduce: sign vector must lie in A_2q");

  ReductionSummary r{eps, {}, {}, 0, {}, {}, {}, 0, 0, sigma.q()};
  for (std::size_t k = 0; k < sigma.q(); ++k) {
    const std::size_t pos = OperatorSeq::position(k);
    switch (sigma[k]) {
      case Op::PhiMinus:
        if (pos == 0) r.origin_coeff += *r.reduced[pos];
        r.reduced = apply_phi(r.reduced, pos, PhiSign::Minus);
        ++r.m;
        break;
      case Op::PhiPlus:
        r.reduced = apply_phi(r.reduced, pos, PhiSign::Plus);
        ++r.m;
        break;
      case Op::Del:
        ++r.ell;
        break;
    }
  }

  for (std::size_t j = 0; j < r.reduced.size(); ++j) {
    if (r.reduced.is_nontrivial(j)) {
      r.nontrivial_indices.push_back(j);
      r.coeffs.push_back(*r.reduced[j]);
    }
  }
  for (std::size_t k : sigma.j3()) {
    const std::size_t pos = OperatorSeq::position(k);
    auto it = std::lower_bound(r.nontrivial_indices.begin(), r.nontrivial_indices.end(), pos);
    if (it == r.nontrivial_indices.end() || *it != pos) {
      throw InternalError("reduce: differentiated position " + std::to_string(pos + 1) +
                          " is trivial in " + r.reduced.to_string());
    }
    r.diff_positions.push_back(std::size_t(it - r.nontrivial_indices.begin()));
  }
  auto z = zero_sum_structure(r.coeffs);
  r.zero_sum_indices = std::move(z.zero_sum_indices);
  r.jstar = std::move(z.jstar);
  return r;
}

std::size_t PairPartition::pair_count() const noexcept {
  return std::size_t(std::count_if(blocks.begin(), blocks.end(),
                                   [](const auto& b) { return b.size() == 2; }));
}

namespace {

void p2_recurse(std::vector<std::size_t>& rest, std::vector<std::vector<std::size_t>>& cur,
                std::vector<PairPartition>& out) {
  if (rest.empty()) {
    out.push_back(PairPartition{cur});
    return;
  }
  const std::size_t first = rest.front();
  std::vector<std::size_t> tail(rest.begin() + 1, rest.end());
  cur.push_back({first});
  p2_recurse(tail, cur, out);
  cur.pop_back();
  for (std::size_t i = 0; i < tail.size(); ++i) {
    std::vector<std::size_t> remaining;
    remaining.reserve(tail.size() - 1);
    for (std::size_t j = 0; j < tail.size(); ++j) {
      if (j != i) remaining.push_back(tail[j]);
    }
    cur.push_back({first, tail[i]});
    p2_recurse(remaining, cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<PairPartition> enumerate_P2(std::span<const std::size_t> positions) {
  if (positions.size() > kMaxPartitionSize) {
    throw ResourceError("enumerate_P2: at most " + std::to_string(kMaxPartitionSize) +
                        " positions");
  }
  std::vector<std::size_t> rest(positions.begin(), positions.end());
  std::sort(rest.begin(), rest.end());
  if (std::adjacent_find(rest.begin(), rest.end()) != rest.end()) {
    throw PreconditionError("enumerate_P2: positions must be distinct");
  }
  std::vector<PairPartition> out;
  std::vector<std::vector<std::size_t>> cur;
  p2_recurse(rest, cur, out);
  return out;
}

unsigned long long involution_number(std::size_t n) {
  unsigned long long a = 1, b = 1;
  for (std::size_t k = 2; k <= n; ++k) {
    const unsigned long long c = b + (k - 1) * a;
    a = b;
    b = c;
  }
  return b;
}

SymbolicExpansion faa_di_bruno(const ReductionSummary& summary) {
  SymbolicExpansion ex{{}, summary};
  for (const auto& p : enumerate_P2(summary.diff_positions)) {
    ExpansionTerm t;
    t.power = p.blocks.size();
    for (const auto& b : p.blocks) {
      if (b.size() == 1) {
        t.single_blocks.push_back(b[0]);
      } else {
        t.pair_blocks.emplace_back(b[0], b[1]);
      }
    }
    ex.terms.push_back(std::move(t));
  }
  return ex;
}

double eval_expansion(const SymbolicExpansion& expansion, double H,
                      std::span<const double> times, double c) {
  validate_hurst(H);
  const auto& ctx = expansion.context;
  const std::size_t I = ctx.coeffs.size();
  if (times.size() != I) throw PreconditionError("eval_expansion: need one time per variable");
  for (std::size_t i = 1; i < I; ++i) {
    if (!(times[i] > times[i - 1])) {
      throw DomainError("eval_expansion: times must be strictly increasing");
    }
  }
  const bool origin = ctx.origin_coeff != 0;
  if (I > 0 && (origin ? !(times[0] > 0.0) : times[0] < 0.0)) {
    throw DomainError("eval_expansion: times must be positive");
  }

  // Augmented zero-sum vector: origin slot (if any) first.
  const std::size_t off = origin ? 1 : 0;
  const std::size_t n = I + off;
  double a[64];
  double s[64];
  if (n > 64) throw ResourceError("eval_expansion: too many variables");
  if (origin) {
    a[0] = ctx.origin_coeff;
    s[0] = 0.0;
  }
  for (std::size_t i = 0; i < I; ++i) {
    a[i + off] = ctx.coeffs[i];
    s[i + off] = times[i];
  }

  const double h2 = 2.0 * H;
  double g = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) g += a[i] * a[j] * std::pow(s[j] - s[i], h2);
  }
  auto dg_at = [&](std::size_t k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) acc += a[j] * std::pow(s[k] - s[j], h2 - 1.0);
    for (std::size_t j = k + 1; j < n; ++j) acc -= a[j] * std::pow(s[j] - s[k], h2 - 1.0);
    return h2 * a[k] * acc;
  };
  auto d2g_at = [&](std::size_t i, std::size_t j) {
    return -h2 * (h2 - 1.0) * a[i] * a[j] * std::pow(std::abs(s[j] - s[i]), h2 - 2.0);
  };

  double singles[64];
  for (std::size_t p : ctx.diff_positions) singles[p] = dg_at(p + off);

  double total = 0.0;
  for (const auto& t : expansion.terms) {
    double prod = std::pow(c, double(t.power));
    for (std::size_t p : t.single_blocks) prod *= singles[p];
    for (auto [x, y] : t.pair_blocks) prod *= d2g_at(x + off, y + off);
    total += prod;
  }
  return total * std::exp(c * g);
}

}  // namespace fgdim
