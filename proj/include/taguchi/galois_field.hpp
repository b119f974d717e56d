#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "taguchi/error.hpp"

namespace taguchi {

/// q = p^n with p prime, or nothing when q is not a prime power.
struct PrimePower {
  unsigned prime;
  unsigned exponent;
};

inline std::optional<PrimePower> factor_prime_power(unsigned q) {
  if (q < 2) return std::nullopt;
  unsigned p = 2;
  while (p * p <= q && q % p != 0) ++p;
  if (q % p != 0) p = q;  // q itself is prime
  unsigned exponent = 0;
  while (q % p == 0) {
    q /= p;
    ++exponent;
  }
  if (q != 1) return std::nullopt;
  return PrimePower{p, exponent};
}

/// Finite field GF(p^n) with elements encoded as integers 0..q-1: the base-p
/// digits of an element are the coefficients of its polynomial representation
/// (least significant digit = constant term). Addition and multiplication are
/// tabulated at construction, so fields are meant to stay small (q <= 256).
class GaloisField {
 public:
  explicit GaloisField(unsigned order) : order_(order) {
    auto pp = factor_prime_power(order);
    if (!pp) fail_validation(std::to_string(order) + " is not a prime power");
    if (order > 256) fail_validation("field order " + std::to_string(order) + " exceeds 256");
    prime_ = pp->prime;
    degree_ = pp->exponent;
    modulus_ = degree_ == 1 ? std::vector<unsigned>{0, 1} : find_modulus(prime_, degree_);
    build_tables();
  }

  unsigned order() const { return order_; }
  unsigned characteristic() const { return prime_; }
  unsigned degree() const { return degree_; }

  /// Coefficients of the reduction polynomial, constant term first. For
  /// GF(4) this is x^2 + x + 1 = {1, 1, 1}.
  const std::vector<unsigned>& modulus() const { return modulus_; }

  unsigned add(unsigned a, unsigned b) const { return add_[a * order_ + b]; }
  unsigned mul(unsigned a, unsigned b) const { return mul_[a * order_ + b]; }

  unsigned neg(unsigned a) const {
    for (unsigned b = 0; b < order_; ++b) {
      if (add(a, b) == 0) return b;
    }
    return 0;  // unreachable in a field
  }

  unsigned inverse(unsigned a) const {
    if (a == 0) fail_validation("zero has no multiplicative inverse");
    for (unsigned b = 1; b < order_; ++b) {
      if (mul(a, b) == 1) return b;
    }
    fail_validation("element without inverse; modulus is not irreducible");
  }

 private:
  using Poly = std::vector<unsigned>;  // constant term first

  static Poly digits(unsigned value, unsigned p, unsigned n) {
    Poly coeffs(n, 0);
    for (unsigned i = 0; i < n; ++i) {
      coeffs[i] = value % p;
      value /= p;
    }
    return coeffs;
  }

  // Remainder of a modulo monic b over GF(p).
  static Poly poly_mod(Poly a, const Poly& b, unsigned p) {
    const std::size_t db = b.size() - 1;
    while (a.size() > db) {
      const unsigned lead = a.back();
      if (lead != 0) {
        const std::size_t shift = a.size() - 1 - db;
        for (std::size_t i = 0; i <= db; ++i) {
          a[shift + i] = (a[shift + i] + (p - lead) * b[i]) % p;
        }
      }
      a.pop_back();
    }
    return a;
  }

  static bool is_zero(const Poly& a) {
    for (unsigned c : a) {
      if (c != 0) return false;
    }
    return true;
  }

  // Lowest-encoded monic irreducible polynomial of degree n, by trial division
  // against every monic polynomial of degree 1..n/2.
  static Poly find_modulus(unsigned p, unsigned n) {
    unsigned tail_count = 1;
    for (unsigned i = 0; i < n; ++i) tail_count *= p;
    for (unsigned tail = 0; tail < tail_count; ++tail) {
      Poly candidate = digits(tail, p, n);
      candidate.push_back(1);
      if (candidate[0] == 0) continue;  // divisible by x
      bool irreducible = true;
      for (unsigned d = 1; d <= n / 2 && irreducible; ++d) {
        unsigned divisor_count = 1;
        for (unsigned i = 0; i < d; ++i) divisor_count *= p;
        for (unsigned low = 0; low < divisor_count; ++low) {
          Poly divisor = digits(low, p, d);
          divisor.push_back(1);
          if (is_zero(poly_mod(candidate, divisor, p))) {
            irreducible = false;
            break;
          }
        }
      }
      if (irreducible) return candidate;
    }
    fail_validation("no irreducible polynomial found");  // unreachable
  }

  unsigned encode(const Poly& coeffs) const {
    unsigned value = 0;
    for (std::size_t i = coeffs.size(); i-- > 0;) value = value * prime_ + coeffs[i];
    return value;
  }

  void build_tables() {
    add_.assign(order_ * order_, 0);
    mul_.assign(order_ * order_, 0);
    for (unsigned a = 0; a < order_; ++a) {
      const Poly pa = digits(a, prime_, degree_);
      for (unsigned b = 0; b < order_; ++b) {
        const Poly pb = digits(b, prime_, degree_);
        Poly sum(degree_);
        for (unsigned i = 0; i < degree_; ++i) sum[i] = (pa[i] + pb[i]) % prime_;
        add_[a * order_ + b] = encode(sum);

        Poly product(2 * degree_ - 1, 0);
        for (unsigned i = 0; i < degree_; ++i) {
          for (unsigned j = 0; j < degree_; ++j) {
            product[i + j] = (product[i + j] + pa[i] * pb[j]) % prime_;
          }
        }
        product = poly_mod(std::move(product), modulus_, prime_);
        product.resize(degree_, 0);
        mul_[a * order_ + b] = encode(product);
      }
    }
  }

  unsigned order_;
  unsigned prime_ = 0;
  unsigned degree_ = 0;
  Poly modulus_;
  std::vector<unsigned> add_;
  std::vector<unsigned> mul_;
};

}  // namespace taguchi
