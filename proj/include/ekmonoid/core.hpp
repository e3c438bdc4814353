#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/rational.hpp>

#include "ekmonoid/errors.hpp"
#include "ekmonoid/numeric.hpp"

namespace ekmonoid {

// ---------------------------------------------------------------------------
// Primes and factorizations
// ---------------------------------------------------------------------------

/// Identifier of a prime, unique within one monoid instance.
///
/// Text form is `major` when minor == 0 and `major.minor` otherwise; the
/// pair (0, 0) is reserved for the place at infinity and prints as `inf`.
struct PrimeId {
    std::uint64_t major = 0;
    std::uint32_t minor = 0;

    static constexpr PrimeId infinity() { return {0, 0}; }

    std::string to_string() const;
    static PrimeId parse(std::string_view text);

    friend constexpr auto operator<=>(const PrimeId&, const PrimeId&) = default;
};

/// A prime generator together with its norm (always >= 2).
struct PrimeRef {
    PrimeId id;
    std::uint64_t norm = 2;

    friend constexpr bool operator==(const PrimeRef& a, const PrimeRef& b) {
        return a.id == b.id && a.norm == b.norm;
    }
    /// Canonical stream order: by norm, then id.
    friend constexpr std::strong_ordering operator<=>(const PrimeRef& a, const PrimeRef& b) {
        if (auto c = a.norm <=> b.norm; c != 0) return c;
        return a.id <=> b.id;
    }
};

struct Term {
    PrimeRef prime;
    std::uint32_t exponent = 1;

    friend constexpr bool operator==(const Term&, const Term&) = default;
    friend constexpr auto operator<=>(const Term& a, const Term& b) {
        if (auto c = a.prime <=> b.prime; c != 0) return c;
        return a.exponent <=> b.exponent;
    }
};

using Terms = std::span<const Term>;

/// Element of the free monoid as a finite exponent map, keyed by (norm, id).
/// The empty map is the identity.
class Factorization {
public:
    Factorization() = default;
    /// Sorts the terms; throws on zero exponents or repeated primes.
    explicit Factorization(std::vector<Term> terms);
    Factorization(std::initializer_list<Term> terms)
        : Factorization(std::vector<Term>(terms)) {}

    Terms terms() const { return terms_; }
    operator Terms() const { return terms_; }  // NOLINT: views are the currency
    bool is_identity() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    /// n_p(m); 0 when p does not divide m.
    std::uint32_t exponent_of(const PrimeRef& p) const;

    /// Monoid operation (exponents add).
    friend Factorization operator+(const Factorization& a, const Factorization& b);
    friend bool operator==(const Factorization&, const Factorization&) = default;
    friend auto operator<=>(const Factorization& a, const Factorization& b) {
        return std::lexicographical_compare_three_way(a.terms_.begin(), a.terms_.end(),
                                                      b.terms_.begin(), b.terms_.end());
    }

private:
    std::vector<Term> terms_;
};

/// Non-owning element handed out by enumerators; `norm` equals the product.
struct ElementView {
    std::uint64_t norm = 1;
    Terms terms;
};

// ---------------------------------------------------------------------------
// Weight sequences
// ---------------------------------------------------------------------------

using Rational = boost::rational<std::int64_t>;

/// Declared growth bound a_i << B^i with B <= 2^(1/k - alpha).
struct GrowthCertificate {
    Real B = 1;
    Real alpha = 0.5L;
    unsigned k = 1;

    /// The declared inequality, checked on the decimals.
    bool holds() const;
};

/// Coefficient sequence (a_1, a_2, ...) defining omega_A = sum_k a_k omega_k.
class WeightSequence {
public:
    enum class Kind { AllOnes, Linear, LogDivisor, Alternating, Indicator, Custom, Sum };

    /// a_i = 1 (omega). `k` selects the normalization index the
    /// certificate is issued for.
    static WeightSequence all_ones(unsigned k = 1);
    /// a_i = i (big omega).
    static WeightSequence linear(unsigned k = 1);
    /// a_i = log(i + 1) (log of the divisor count).
    static WeightSequence log_divisor(unsigned k = 1);
    /// a_i = (-1)^(i-1) (omega_T).
    static WeightSequence alternating(unsigned k = 1);
    /// a_i = [i == index] (omega_index).
    static WeightSequence indicator(unsigned index);
    /// Finitely supported exact coefficients; unspecified a_i are 0.
    static WeightSequence from_terms(std::map<std::uint32_t, Rational> coefficients,
                                     GrowthCertificate growth);

    Kind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    const GrowthCertificate& growth() const { return growth_; }

    /// a_i for i >= 1.
    Real operator[](std::uint32_t i) const { return decimal_(i); }
    /// Exact a_i when the sequence is rational.
    std::optional<Rational> exact(std::uint32_t i) const;
    bool is_exact() const { return static_cast<bool>(exact_); }

    WeightSequence operator+(const WeightSequence& other) const;

private:
    WeightSequence(Kind kind, std::string name, std::function<Real(std::uint32_t)> decimal,
                   std::function<Rational(std::uint32_t)> exact, GrowthCertificate growth);

    Kind kind_;
    std::string name_;
    std::function<Real(std::uint32_t)> decimal_;
    std::function<Rational(std::uint32_t)> exact_;
    GrowthCertificate growth_;
};

// ---------------------------------------------------------------------------
// Arithmetic statistics
// ---------------------------------------------------------------------------

/// Exact norm; the identity has norm 1.
BigInt norm(Terms f);
/// Distinct primes.
std::uint32_t omega(Terms f);
/// Primes with multiplicity.
std::uint64_t big_omega(Terms f);
/// Primes whose exponent is exactly k (k >= 1).
std::uint32_t omega_k(Terms f, std::uint32_t k);
/// Sub-element keeping the primes of exponent exactly k.
Factorization project_k(Terms f, std::uint32_t k);
/// Natural log of the number of divisors.
Real log_divisor_count(Terms f);
/// (# odd-exponent primes) - (# even-exponent primes).
std::int64_t omega_T(Terms f);
/// sum_k a_k omega_k(f).
Real omega_weighted(Terms f, const WeightSequence& a);
/// Same, exactly; throws InvalidArgument when `a` is not rational.
Rational omega_weighted_exact(Terms f, const WeightSequence& a);

bool is_h_free(Terms f, std::uint32_t h);
bool is_h_full(Terms f, std::uint32_t h);

/// Largest exponent in f (0 for the identity).
std::uint32_t max_exponent(Terms f);

// ---------------------------------------------------------------------------
// Serialization: `norm<TAB>id^e,id^e,...`, identity as `1<TAB>-`.
// ---------------------------------------------------------------------------

std::string format_element(std::uint64_t norm, Terms f);
std::string format_element(const Factorization& f);

/// Resolves an id to its prime, or nullopt when unknown.
using PrimeResolver = std::function<std::optional<PrimeRef>(const PrimeId&)>;

/// Parses one serialized line; checks the stated norm against the product.
Factorization parse_element(std::string_view line, const PrimeResolver& resolve);

}  // namespace ekmonoid
