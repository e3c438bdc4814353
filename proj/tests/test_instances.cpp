#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "ekmonoid/instances.hpp"
#include "oracles.hpp"

using namespace ekmonoid;

namespace {

std::vector<std::uint64_t> norms(const std::vector<PrimeRef>& v) {
    std::vector<std::uint64_t> out;
    for (const auto& p : v) out.push_back(p.norm);
    return out;
}

bool sums_to_two_squares(std::uint64_t p) {
    for (std::uint64_t a = 1; a * a < p; ++a)
        for (std::uint64_t b = 1; b <= a; ++b)
            if (a * a + b * b == p) return true;
    return false;
}

}  // namespace

TEST_CASE("integers: stream, density and counts") {
    const auto z = MonoidInstance::integers(10);
    CHECK(norms(z.primes(1, 100)) == std::vector<std::uint64_t>{2, 3, 5, 7});
    const auto z100 = MonoidInstance::integers(100);
    CHECK(z100.primes(2, 100).size() == 25);
    CHECK(z100.primes(2, 100).size() == oracle::primes_upto(100).size());
    CHECK(z.kappa() == 1);
    CHECK(z.theta() == 0);
    CHECK_FALSE(z.lattice().is_powers());
    for (std::uint64_t x : {1ull, 2ull, 17ull, 1000ull, 123456789ull}) {
        CHECK(*z.count_all(x) == x);
        CHECK(std::fabs(static_cast<double>(*z.count_all(x)) - static_cast<double>(x)) <= 1);
    }
}

TEST_CASE("integers: primes match trial division and ranges compose") {
    const auto z = MonoidInstance::integers(20000);
    const auto all = z.primes(2, 20000);
    CHECK(norms(all) == oracle::primes_upto(20000));
    for (auto [lo, hi] : {std::pair{2ull, 2ull}, {3ull, 4ull}, {100ull, 200ull}, {19990ull, 30000ull}}) {
        std::vector<std::uint64_t> expect;
        for (auto p : oracle::primes_upto(std::min<std::uint64_t>(hi, 20000)))
            if (p >= lo) expect.push_back(p);
        CHECK(norms(z.primes(lo, hi)) == expect);
    }
    CHECK(z.primes(1000, 999).empty());
}

TEST_CASE("streams are repeatable and ordered") {
    for (const auto& inst : {MonoidInstance::integers(5000), MonoidInstance::gaussian(5000),
                             MonoidInstance::polynomials_fq(3, 7), MonoidInstance::projective_line(2, 12)}) {
        const auto a = inst.primes(1, 5000), b = inst.primes(1, 5000);
        CHECK(a == b);
        CHECK(std::is_sorted(a.begin(), a.end()));
        CHECK(std::adjacent_find(a.begin(), a.end()) == a.end());
        for (const auto& p : a) CHECK(p.norm >= 2);
    }
}

TEST_CASE("norm classes agree with the listed primes") {
    for (const auto& inst : {MonoidInstance::integers(3000), MonoidInstance::gaussian(3000),
                             MonoidInstance::polynomials_fq(2, 11), MonoidInstance::projective_line(3, 7)}) {
        std::map<std::uint64_t, std::uint64_t> from_list, from_classes;
        for (const auto& p : inst.primes(1, 3000)) ++from_list[p.norm];
        inst.for_each_norm_class(1, 3000, [&](std::uint64_t n, std::uint64_t c) { from_classes[n] += c; });
        CHECK(from_list == from_classes);
    }
}

TEST_CASE("gaussian: ramified, split and inert primes") {
    const auto g = MonoidInstance::gaussian(100);
    auto above = [&](std::uint64_t p) {
        std::vector<PrimeRef> out;
        for (const auto& r : g.primes(1, 100))
            if (r.id.major == p) out.push_back(r);
        return out;
    };
    REQUIRE(above(2).size() == 1);
    CHECK(above(2)[0].norm == 2);
    REQUIRE(above(5).size() == 2);
    CHECK(above(5)[0].norm == 5);
    CHECK(above(5)[1].norm == 5);
    REQUIRE(above(3).size() == 1);
    CHECK(above(3)[0].norm == 9);
    CHECK(above(11).empty());  // 121 > 100
    CHECK(g.kappa() == doctest::Approx(std::numbers::pi / 4));
    CHECK(g.theta() == doctest::Approx(1.0 / 3));
}

TEST_CASE("gaussian: classification partitions each rational prime") {
    const std::uint64_t L = 40000;
    const auto g = MonoidInstance::gaussian(L);
    std::map<std::uint64_t, std::vector<PrimeRef>> by_p;
    for (const auto& r : g.primes(1, L)) by_p[r.id.major].push_back(r);
    for (auto p : oracle::primes_upto(L)) {
        const auto& refs = by_p[p];
        if (p == 2) {
            REQUIRE(refs.size() == 1);
            CHECK(refs[0].norm == 2);
        } else if (sums_to_two_squares(p)) {
            REQUIRE(refs.size() == 2);
            CHECK(refs[0].norm * refs[1].norm == p * p);
        } else if (p * p <= L) {
            REQUIRE(refs.size() == 1);
            CHECK(refs[0].norm == p * p);
        } else {
            CHECK(refs.empty());
        }
    }
}

TEST_CASE("gaussian ideal count oracle") {
    CHECK(gaussian_ideal_count_oracle(1) == 1);
    CHECK(gaussian_ideal_count_oracle(10) == 9);
    for (std::uint64_t x = 1; x <= 3000; x += 7)
        CHECK(gaussian_ideal_count_oracle(x) == oracle::gaussian_ideal_count(x));
}

TEST_CASE("gaussian satisfies the density condition with theta = 1/3") {
    // |I(x) - pi x / 4| against x^(1/3) on a geometric ladder; C fitted.
    Real worst = 0;
    for (std::uint64_t x = 100; x <= 10'000'000; x *= 10) {
        const Real err = std::fabs(static_cast<Real>(gaussian_ideal_count_oracle(x)) -
                                   std::numbers::pi_v<Real> / 4 * static_cast<Real>(x));
        worst = std::max(worst, err / std::cbrt(static_cast<Real>(x)));
    }
    CHECK(worst < 3);
}

TEST_CASE("fq: necklace counts") {
    const auto f = MonoidInstance::polynomials_fq(2, 8);
    auto count_of_norm = [&](std::uint64_t n) { return f.primes(n, n).size(); };
    CHECK(count_of_norm(8) == 2);
    CHECK(count_of_norm(16) == 3);
    CHECK(irreducible_count(2, 3) == 2);
    CHECK(irreducible_count(2, 4) == 3);
    CHECK(f.kappa() == 2);
    CHECK(f.theta() == 0);
    CHECK(f.lattice().is_powers());
    CHECK(f.lattice().floor(10) == 8);
    CHECK(f.lattice().floor(16) == 16);
    for (unsigned d = 1; d <= 8; ++d) CHECK(irreducible_count(2, d) == oracle::irreducible_codes(2, d).size());
    for (unsigned d = 1; d <= 5; ++d) CHECK(irreducible_count(3, d) == oracle::irreducible_codes(3, d).size());
    for (unsigned d = 1; d <= 3; ++d) CHECK(irreducible_count(5, d) == oracle::irreducible_codes(5, d).size());
}

TEST_CASE("fq: Gauss identity sum_{d|n} d pi_q(d) = q^n") {
    for (std::uint64_t q : {2ull, 3ull, 4ull, 5ull, 8ull, 9ull}) {
        for (unsigned n = 1; std::pow(double(q), n) < 1e18; ++n) {
            unsigned __int128 total = 0;
            for (unsigned d = 1; d <= n; ++d)
                if (n % d == 0) total += static_cast<unsigned __int128>(d) * irreducible_count(q, d);
            unsigned __int128 qn = 1;
            for (unsigned i = 0; i < n; ++i) qn *= q;
            CHECK(total == qn);
        }
    }
}

TEST_CASE("fq: materialized irreducibles match trial division") {
    for (unsigned d = 1; d <= 10; ++d) CHECK(irreducible_codes(2, d) == oracle::irreducible_codes(2, d));
    for (unsigned d = 1; d <= 6; ++d) CHECK(irreducible_codes(3, d) == oracle::irreducible_codes(3, d));
    for (unsigned d = 1; d <= 4; ++d) CHECK(irreducible_codes(5, d) == oracle::irreducible_codes(5, d));
}

TEST_CASE("fq: prime powers only") {
    for (std::uint64_t q : {2ull, 3ull, 4ull, 8ull, 9ull, 25ull, 27ull, 1024ull}) CHECK(is_prime_power(q));
    for (std::uint64_t q : {0ull, 1ull, 6ull, 10ull, 12ull, 36ull}) CHECK_FALSE(is_prime_power(q));
    CHECK_THROWS_AS(MonoidInstance::polynomials_fq(6, 3), Error);
    CHECK_THROWS_AS(MonoidInstance::polynomials_fq(1, 3), Error);
    CHECK_THROWS_AS(make_instance("fq:q=10", 1000), Error);
}

TEST_CASE("fq: total monic count is exact") {
    for (std::uint64_t q : {2ull, 3ull}) {
        const auto f = MonoidInstance::polynomials_fq(q, 12);
        std::uint64_t qn = 1;
        for (unsigned n = 0; n <= 12; ++n, qn *= q) {
            const std::uint64_t expect = (qn * q - 1) / (q - 1);
            CHECK(*f.count_all(qn) == expect);
            // kappa q^n - 1/(q - 1): the error term is bounded, theta = 0.
            CHECK(std::fabs(static_cast<double>(expect) - static_cast<double>(f.kappa() * qn)) <= 1);
        }
    }
}

TEST_CASE("p1: rational points, kappa and effective divisor counts") {
    const auto p1 = MonoidInstance::projective_line(2, 10);
    const auto deg1 = p1.primes(2, 2);
    REQUIRE(deg1.size() == 3);
    CHECK(deg1[0].id == PrimeId::infinity());
    CHECK(p1.kappa() == doctest::Approx(4.0));
    CHECK(*p1.count_all(4) - *p1.count_all(2) == 7);

    // Degree-n coefficients of prod_d (1 - t^d)^(-P_d), P_d the number of
    // places of degree d, expanded directly.
    for (std::uint64_t q : {2ull, 3ull}) {
        const unsigned N = 9;
        const auto inst = MonoidInstance::projective_line(q, N);
        std::vector<std::uint64_t> places(N + 1, 0);
        std::uint64_t qd = 1;
        for (unsigned d = 1; d <= N; ++d) {
            qd *= q;
            places[d] = inst.primes(qd, qd).size();
        }
        std::vector<BigInt> series(N + 1, 0);
        series[0] = 1;
        for (unsigned d = 1; d <= N; ++d)
            for (std::uint64_t k = 0; k < places[d]; ++k)
                for (unsigned n = d; n <= N; ++n) series[n] += series[n - d];
        std::uint64_t qn = 1;
        BigInt cumulative = 0;
        for (unsigned n = 0; n <= N; ++n, qn *= q) {
            CHECK(series[n] == (qn * q - 1) / (q - 1));
            cumulative += series[n];
            CHECK(BigInt(*inst.count_all(qn)) == cumulative);
        }
    }
}

TEST_CASE("resolve maps ids back to primes") {
    const auto z = MonoidInstance::integers(1000);
    CHECK(z.resolve({7, 0})->norm == 7);
    CHECK_FALSE(z.resolve({8, 0}).has_value());
    CHECK_FALSE(z.resolve({7, 1}).has_value());
    CHECK_FALSE(z.resolve({1009, 0}).has_value());

    const auto g = MonoidInstance::gaussian(1000);
    CHECK(g.resolve({5, 1})->norm == 5);
    CHECK(g.resolve({3, 0})->norm == 9);
    CHECK_FALSE(g.resolve({7, 1}).has_value());
    CHECK_FALSE(g.resolve({2, 1}).has_value());

    const auto f = MonoidInstance::polynomials_fq(2, 6);
    CHECK(f.resolve({3, 1})->norm == 8);
    CHECK_FALSE(f.resolve({3, 2}).has_value());
    CHECK_FALSE(f.resolve(PrimeId::infinity()).has_value());
    CHECK(MonoidInstance::projective_line(2, 6).resolve(PrimeId::infinity())->norm == 2);

    for (const auto& inst : {z, g, f}) {
        const auto r = inst.resolver();
        for (const auto& p : inst.primes(1, 1000)) CHECK(*r(p.id) == p);
    }
}

TEST_CASE("rigorous prime tails cover the actual tails") {
    const auto z = MonoidInstance::integers(20'000'000);
    for (std::uint64_t T : {1000ull, 100000ull}) {
        for (Real alpha : {1.5L, 2.0L, 3.0L}) {
            Real direct = 0;
            for (const auto& p : z.primes(T + 1, 20'000'000)) direct += std::pow(Real(p.norm), -alpha);
            const auto est = z.prime_tail(alpha, T);
            CHECK(est.rigorous);
            CHECK(direct <= est.bound);
        }
    }
    const auto f = MonoidInstance::polynomials_fq(2, 40);
    Real direct = 0;
    std::uint64_t qd = 1;
    for (unsigned d = 1; d <= 40; ++d) {
        qd *= 2;
        if (d > 10) direct += static_cast<Real>(irreducible_count(2, d)) * std::pow(Real(qd), -2.0L);
    }
    CHECK(direct <= f.prime_tail(2, 1024).bound);
}

TEST_CASE("instance strings") {
    CHECK(make_instance("integers", 100).name() == "integers");
    CHECK(make_instance("gaussian", 100).kind() == InstanceKind::Gaussian);
    CHECK(make_instance("fq:q=3", 100).q() == 3);
    CHECK(make_instance("fq:q=3", 100).lattice().base == 3);
    CHECK(make_instance("p1:q=2", 100).kind() == InstanceKind::ProjectiveLine);
    CHECK_THROWS_AS(make_instance("rationals", 100), Error);
    CHECK_THROWS_AS(make_instance("fq:q=2,r=3", 100), Error);
    CHECK_THROWS_AS(make_instance("fq:", 100), Error);
}

TEST_CASE("custom instances from a prime list file") {
    const auto path = std::filesystem::temp_directory_path() / "ekmonoid_custom_primes.tsv";
    {
        std::ofstream out(path);
        for (auto p : oracle::primes_upto(200)) out << p << '\t' << p << '\n';
    }
    const auto c = make_instance("custom:file=" + path.string() + ",kappa=1,theta=0", 0);
    CHECK(c.kind() == InstanceKind::Custom);
    CHECK(norms(c.primes(1, 1000)) == oracle::primes_upto(200));
    CHECK_FALSE(c.prime_tail(2, 100).rigorous);
    CHECK(c.widened(UINT64_MAX).limit() == c.limit());
    {
        std::ofstream out(path);
        out << "3\t3\n2\t2\n";
    }
    CHECK_THROWS_AS(MonoidInstance::from_file(path.string(), 1, 0), Error);
    {
        std::ofstream out(path);
        out << "2\t1\n";
    }
    CHECK_THROWS_AS(MonoidInstance::from_file(path.string(), 1, 0), Error);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(MonoidInstance::custom("bad", {}, 0, 0), Error);
    CHECK_THROWS_AS(MonoidInstance::custom("bad", {}, 1, 1), Error);
}

TEST_CASE("widening extends the stream") {
    const auto z = MonoidInstance::integers(100);
    CHECK(z.widened(1000).primes(1, 1000).size() == 168);
    const auto f = MonoidInstance::polynomials_fq(2, 4);
    CHECK(f.widened(1 << 10).primes(1024, 1024).size() == irreducible_count(2, 10));
}
