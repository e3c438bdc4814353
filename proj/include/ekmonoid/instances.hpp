#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ekmonoid/core.hpp"

namespace ekmonoid {

enum class InstanceKind { Integers, Gaussian, PolynomialsFq, ProjectiveLine, Custom };

/// The set X of admissible norm bounds.
struct NormLattice {
    std::uint64_t base = 0;  // 0: all rationals; q: powers of q

    bool is_powers() const { return base != 0; }
    /// Largest lattice point <= x (x itself on the rational lattice).
    std::uint64_t floor(std::uint64_t x) const;
};

/// Upper bound for a prime tail sum, tagged with its strength.
struct TailEstimate {
    Real bound = 0;
    bool rigorous = true;
};

struct PrimeSource;

/// A free abelian monoid given by its primes (ordered by norm, then id)
/// together with the density data kappa, theta of |M(x)| = kappa x + O(x^theta).
///
/// Instances are cheap handles to immutable shared state; prime streams are
/// regenerated on each traversal and can be walked from several threads.
class MonoidInstance {
public:
    /// Rational integers; primes up to `limit`.
    static MonoidInstance integers(std::uint64_t limit);
    /// Ideals of Z[i]; prime ideals of norm up to `limit`.
    static MonoidInstance gaussian(std::uint64_t limit);
    /// Monic polynomials over F_q, degrees up to max_degree.
    static MonoidInstance polynomials_fq(std::uint64_t q, unsigned max_degree);
    /// Effective divisors on P^1 over F_q: F_q[x] plus the place at infinity.
    static MonoidInstance projective_line(std::uint64_t q, unsigned max_degree);
    /// User-supplied primes, already in (norm, id) order.
    static MonoidInstance custom(std::string name, std::vector<PrimeRef> primes, Real kappa,
                                 Real theta);
    /// Reads `prime_id<TAB>norm` lines sorted by norm.
    static MonoidInstance from_file(const std::string& path, Real kappa, Real theta);

    const std::string& name() const;
    InstanceKind kind() const;
    Real kappa() const;
    Real theta() const;
    NormLattice lattice() const;
    /// Field size for the function-field instances, 0 otherwise.
    std::uint64_t q() const;
    /// Largest prime norm the stream will produce.
    std::uint64_t limit() const;

    /// Primes with lo <= norm <= hi in canonical order.
    std::vector<PrimeRef> primes(std::uint64_t lo, std::uint64_t hi) const;
    /// Visits (norm, number of primes of that norm) for norms in [lo, hi],
    /// ascending, without materializing the primes.
    void for_each_norm_class(std::uint64_t lo, std::uint64_t hi,
                             const std::function<void(std::uint64_t, std::uint64_t)>& fn) const;

    std::optional<PrimeRef> resolve(const PrimeId& id) const;
    PrimeResolver resolver() const;

    /// Bound on sum_{N(p) > T} N(p)^(-alpha) for alpha > 1. Rigorous for the
    /// built-in instances (explicit prime counting bounds), heuristic for
    /// custom streams.
    TailEstimate prime_tail(Real alpha, std::uint64_t T) const;

    /// The same monoid with its prime stream capped at `limit` instead
    /// (custom instances cannot be extended and are returned unchanged).
    MonoidInstance widened(std::uint64_t limit) const;

    /// |M(x)| in closed form where the instance has one.
    std::optional<std::uint64_t> count_all(std::uint64_t x) const;

private:
    explicit MonoidInstance(std::shared_ptr<const PrimeSource> source);
    std::shared_ptr<const PrimeSource> source_;
};

/// Parses `integers`, `gaussian`, `fq:q=<q>`, `p1:q=<q>` or
/// `custom:file=<path>,kappa=<k>,theta=<t>`; the stream is capped at `limit`.
MonoidInstance make_instance(std::string_view spec, std::uint64_t limit);

/// sum_{n<=x} sum_{d|n} chi_{-4}(d): the number of nonzero ideals of Z[i]
/// of norm at most x.
std::uint64_t gaussian_ideal_count_oracle(std::uint64_t x);

/// Number of monic irreducible polynomials of degree d over F_q
/// (necklace formula). Throws when the count overflows 64 bits.
std::uint64_t irreducible_count(std::uint64_t q, unsigned d);

/// True when q = p^e for a prime p and e >= 1.
bool is_prime_power(std::uint64_t q);

/// The monic irreducible polynomials of degree d over F_q for prime q,
/// listed in increasing order of their code sum_{i<d} c_i q^i (coefficients of
/// x^0..x^(d-1)). The position in this list is the prime's id minor.
std::vector<std::uint64_t> irreducible_codes(std::uint64_t q, unsigned d);

}  // namespace ekmonoid
