#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/distributions/normal.hpp>

#include "ekmonoid/stats.hpp"
#include "oracles.hpp"

using namespace ekmonoid;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return ErrorCode::InvalidArgument;
}

std::vector<double> sorted_scores(ScoreSet s) {
    std::sort(s.scores.begin(), s.scores.end());
    return s.scores;
}

Real lnln(Real n) { return std::log(std::log(n)); }

struct Pairing {
    const char* instance;
    std::uint64_t x_small, x_large;
    const char* subset;
    const char* stat;
};

// Statistic / subset pairings covered by the theorems, with a small and a
// desk-scale x.
const std::vector<Pairing> kPairings = {
    {"integers", 10'000, 10'000'000, "all", "omega"},
    {"integers", 10'000, 10'000'000, "hfree:2", "omega"},
    {"integers", 10'000, 1'000'000, "hfree:2", "bigomega"},
    {"integers", 10'000, 1'000'000, "hfree:3", "logd"},
    {"integers", 10'000, 1'000'000, "hfree:3", "omegaT"},
    {"integers", 10'000, 10'000'000'000, "hfull:2", "omega"},
    {"integers", 10'000, 10'000'000'000, "hfull:2", "omega_k:2"},
    {"gaussian", 10'000, 10'000'000, "all", "omega"},
    {"fq:q=2", 1 << 13, 1 << 23, "all", "omega"},
};

ScoreSet run(const Pairing& p, std::uint64_t x) {
    const auto spec = SubsetSpec::parse(p.subset);
    const auto inst = make_instance(p.instance, x);
    return standardized_scores(inst, x, spec, Statistic::preset(p.stat, spec));
}

}  // namespace

TEST_CASE("standardized score formula") {
    const Real L = lnln(16);
    CHECK(standardized_score(3, 16) == doctest::Approx(static_cast<double>((3 - L) / std::sqrt(L))));
    // log log N = 1 exactly at N = e^e ~ 15.15; the integer norms on either
    // side bracket g - 1
    CHECK(standardized_score(2, 15) > 1);
    CHECK(standardized_score(2, 16) < 1);
    CHECK(std::fabs(standardized_score(2, 15) - 1) < 0.02);
    CHECK(code_of([] { standardized_score(1, 2); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("scores are recomputed per element") {
    const auto z = MonoidInstance::integers(10000);
    const auto set = standardized_scores(z, 10000, SubsetSpec::all(), Statistic::preset("omega", SubsetSpec::all()));
    CHECK(set.excluded_small == 2);
    CHECK(set.subset_count() == 10000);
    std::vector<double> expect;
    for (std::uint64_t n = 3; n <= 10000; ++n) {
        const Real L = lnln(Real(n));
        expect.push_back(static_cast<double>((oracle::factor(n).size() - L) / std::sqrt(L)));
    }
    std::sort(expect.begin(), expect.end());
    const auto got = sorted_scores(set);
    REQUIRE(got.size() == expect.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::fabs(got[i] - expect[i]) < 1e-12);

    // log of the divisor count over cube-free integers, normalized by log 2
    const auto spec = SubsetSpec::h_free(3);
    const auto logd = standardized_scores(z, 10000, spec, Statistic::preset("logd", spec));
    std::vector<double> expect_logd;
    for (std::uint64_t n = 3; n <= 10000; ++n) {
        if (!oracle::is_h_free(n, 3)) continue;
        const Real L = lnln(Real(n));
        const Real g = std::log(Real(oracle::divisor_count(n))) / std::log(2.0L);
        expect_logd.push_back(static_cast<double>((g - L) / std::sqrt(L)));
    }
    std::sort(expect_logd.begin(), expect_logd.end());
    const auto got_logd = sorted_scores(logd);
    REQUIRE(got_logd.size() == expect_logd.size());
    for (std::size_t i = 0; i < got_logd.size(); ++i) CHECK(std::fabs(got_logd[i] - expect_logd[i]) < 1e-12);
}

TEST_CASE("gaussian scores match the ideal oracle") {
    const auto g = MonoidInstance::gaussian(5000);
    const auto set = standardized_scores(g, 5000, SubsetSpec::all(), Statistic::preset("omega", SubsetSpec::all()));
    std::vector<double> expect;
    std::uint64_t small = 0;
    for (const auto& f : oracle::gaussian_ideals(5000)) {
        std::uint64_t n = 1;
        for (const auto& t : f.terms())
            for (unsigned i = 0; i < t.exponent; ++i) n *= t.prime.norm;
        if (n < 3) {
            ++small;
            continue;
        }
        const Real L = lnln(Real(n));
        expect.push_back(static_cast<double>((f.size() - L) / std::sqrt(L)));
    }
    std::sort(expect.begin(), expect.end());
    CHECK(set.excluded_small == small);
    CHECK(small == 2);
    const auto got = sorted_scores(set);
    REQUIRE(got.size() == expect.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::fabs(got[i] - expect[i]) < 1e-12);
}

TEST_CASE("excluded elements and subset counts") {
    const auto z = MonoidInstance::integers(100000);
    for (const char* sub : {"all", "hfree:2", "hfree:3", "hfull:2", "hfull:3"}) {
        const auto spec = SubsetSpec::parse(sub);
        const auto set = standardized_scores(z, 100000, spec, Statistic::preset("omega", spec));
        CHECK(set.subset_count() == count(z, 100000, spec));
        CHECK(set.excluded_small == (spec.kind == SubsetSpec::Kind::HFull ? 1u : 2u));
    }
    const auto shards3 = standardized_scores(z, 100000, SubsetSpec::h_free(2),
                                             Statistic::preset("omega", SubsetSpec::h_free(2)), 3);
    const auto shards1 = standardized_scores(z, 100000, SubsetSpec::h_free(2),
                                             Statistic::preset("omega", SubsetSpec::h_free(2)), 1);
    CHECK(sorted_scores(shards3) == sorted_scores(shards1));
}

TEST_CASE("theorem pairings are enforced") {
    const auto z = MonoidInstance::integers(1000);
    const auto hfree = SubsetSpec::h_free(2), hfull = SubsetSpec::h_full(2);
    CHECK(code_of([&] { check_theorem_pairing(hfree, Statistic::preset("omega_k:2", hfree)); }) ==
          ErrorCode::TheoremPairing);
    CHECK(code_of([&] { check_theorem_pairing(hfull, Statistic::preset("omega", hfull, 1)); }) ==
          ErrorCode::TheoremPairing);
    CHECK(code_of([&] { check_theorem_pairing(SubsetSpec::all(), Statistic::preset("omega_k:2", hfull)); }) ==
          ErrorCode::TheoremPairing);
    // certificate issued for k = 1 cannot back a_2 over hfull:2
    Statistic weak{WeightSequence::from_terms({{1, 1}, {2, 1}}, {1.0L, 0.5L, 1}), 2};
    CHECK(code_of([&] { check_theorem_pairing(hfull, weak); }) == ErrorCode::TheoremPairing);
    check_theorem_pairing(hfull, Statistic::preset("omega_k:2", hfull));
    check_theorem_pairing(hfree, Statistic::preset("bigomega", hfree));
    check_theorem_pairing(SubsetSpec::all(), Statistic::preset("omega", SubsetSpec::all()));

    // omega_2 has a_1 = 0
    Statistic zero{WeightSequence::indicator(2), 1};
    CHECK(code_of([&] { zero.normalizer(); }) == ErrorCode::InvalidNormalizer);
    CHECK(code_of([&] { standardized_scores(z, 1000, hfree, zero); }) == ErrorCode::InvalidNormalizer);
}

TEST_CASE("KS distance") {
    boost::math::normal_distribution<double> N01;
    const int n = 1000;
    std::vector<double> q;
    for (int i = 1; i <= n; ++i) q.push_back(quantile(N01, (i - 0.5) / n));
    const Real ks = ks_vs_gaussian(q);
    CHECK(ks <= 1.0 / (2 * n) + 1e-6);
    CHECK(ks >= 1.0 / (2 * n) - 1e-6);

    std::vector<double> zeros(50, 0.0);
    CHECK(static_cast<double>(ks_vs_gaussian(zeros)) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(code_of([] { ks_vs_gaussian({}); }) == ErrorCode::EmptySample);

    std::vector<double> one{0.3};
    const double phi = cdf(N01, 0.3);
    CHECK(static_cast<double>(ks_vs_gaussian(one)) == doctest::Approx(std::max(phi, 1 - phi)));

    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss;
    std::vector<double> shifted(20000);
    for (auto& v : shifted) v = gauss(rng) + 3;
    const Real far = ks_vs_gaussian(shifted);
    CHECK(far > 0.8);
    CHECK(far <= 1);
}

TEST_CASE("Gaussian moments") {
    CHECK(gaussian_moment(1) == 0);
    CHECK(gaussian_moment(2) == 1);
    CHECK(gaussian_moment(3) == 0);
    CHECK(gaussian_moment(4) == 3);
    CHECK(gaussian_moment(6) == 15);
    CHECK(gaussian_moment(8) == 105);
}

TEST_CASE("moment report") {
    std::mt19937_64 rng(20240601);
    std::normal_distribution<double> gauss;
    std::vector<double> sample(1'000'000);
    for (auto& v : sample) v = gauss(rng);
    const auto rows = moment_report(sample, 4);
    REQUIRE(rows.size() == 4);
    for (const auto& row : rows) {
        CHECK(row.gaussian == gaussian_moment(row.r));
        CHECK(row.abs_diff < 0.02);
        CHECK(row.abs_diff == doctest::Approx(static_cast<double>(std::fabs(row.empirical - row.gaussian))));
    }

    const std::vector<double> constant(37, 1.5);
    const auto c = moment_report(constant, 8);
    for (const auto& row : c) CHECK(row.empirical == std::pow(1.5L, row.r));

    CHECK(code_of([&] { moment_report(sample, 9); }) == ErrorCode::Unsupported);
    CHECK(code_of([&] { moment_report(std::vector<double>{1.0}, 2); }) == ErrorCode::EmptySample);
}

TEST_CASE("empirical CDF") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss;
    std::vector<double> sample(50000);
    for (auto& v : sample) v = std::round(gauss(rng) * 20) / 20;  // many ties
    const auto cdf = empirical_cdf(sample);
    REQUIRE(!cdf.empty());
    CHECK(cdf.size() <= 2000);
    CHECK(cdf.back().empirical == 1.0);
    for (std::size_t i = 1; i < cdf.size(); ++i) {
        CHECK(cdf[i].t > cdf[i - 1].t);
        CHECK(cdf[i].empirical >= cdf[i - 1].empirical);
        CHECK(cdf[i].phi >= cdf[i - 1].phi);
    }
    // right-continuity: F(t) counts the ties at t
    std::vector<double> sorted = sample;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& p : cdf) {
        const auto at_or_below = std::upper_bound(sorted.begin(), sorted.end(), p.t) - sorted.begin();
        CHECK(p.empirical == doctest::Approx(double(at_or_below) / sorted.size()));
    }
    const auto few = empirical_cdf(std::vector<double>{2, 1, 1, 3});
    REQUIRE(few.size() == 3);
    CHECK(few[0].empirical == 0.5);
}

TEST_CASE("distribution report") {
    const auto z = MonoidInstance::integers(100000);
    const auto spec = SubsetSpec::h_free(2);
    const auto set = standardized_scores(z, 100000, spec, Statistic::preset("omega", spec));
    const auto rep = distribution_report(set, 4);
    CHECK(rep.ks_distance >= 0);
    CHECK(rep.ks_distance <= 1);
    CHECK(rep.ks_distance == ks_vs_gaussian(set.scores));
    CHECK(rep.n_samples == set.scores.size());
    CHECK(rep.moments.size() == 4);
    CHECK(rep.raw_mean == set.raw_mean);
    // D(a) counts scored elements over the whole subset, so it tops out below 1
    const Real total = static_cast<Real>(set.subset_count());
    for (const auto& d : rep.density) {
        const auto le = std::count_if(set.scores.begin(), set.scores.end(), [&](double s) { return s <= d.a; });
        CHECK(d.density == doctest::Approx(static_cast<double>(le / total)));
    }
}

TEST_CASE("KS shrinks from small to desk-scale x") {
    // omega only: other statistics need not improve monotonically at these
    // sizes (omega_T over cube-free integers goes from 0.174 to 0.200).
    for (const auto& p : kPairings) {
        if (std::string_view(p.stat) != "omega") continue;
        const std::string label = std::string(p.instance) + " " + p.subset + " " + p.stat;
        CAPTURE(label);
        const Real small = ks_vs_gaussian(run(p, p.x_small).scores);
        const Real large = ks_vs_gaussian(run(p, p.x_large).scores);
        CHECK(large < small);
    }
}

// Powerful numbers: 184 scores at 10^4 and 6552 at 10^7 give KS 0.2628 and
// 0.2652; the decrease only shows further out (0.2215 at 10^10).
TEST_CASE("KS over hfull:2 at 10^7 below KS at 10^4" * doctest::should_fail()) {
    const Pairing p{"integers", 10'000, 10'000'000, "hfull:2", "omega"};
    CHECK(ks_vs_gaussian(run(p, p.x_large).scores) < ks_vs_gaussian(run(p, p.x_small).scores));
}

// Var omega(n) ~ log log x + B_2 with B_2 ~ -1.83, so at x = 10^6 the
// normalized second moment of omega sits near 0.4 and reaches 0.5 only
// around log log x ~ 3.7 (x ~ 10^17).
TEST_CASE("second moments lie in [0.5, 1.5] at x >= 10^6" * doctest::should_fail()) {
    for (const auto& p : kPairings) {
        const std::string label = std::string(p.instance) + " " + p.subset + " " + p.stat;
        CAPTURE(label);
        const auto rows = moment_report(run(p, p.x_large).scores, 2);
        CHECK(rows[1].empirical >= 0.5);
        CHECK(rows[1].empirical <= 1.5);
    }
}

namespace {

// sum of omega(n) over squarefree n <= x by a plain sieve
std::uint64_t squarefree_omega_sum(std::uint64_t x) {
    std::vector<std::uint8_t> omega(x + 1, 0);
    std::vector<bool> squarefree(x + 1, true);
    for (std::uint64_t p = 2; p <= x; ++p) {
        if (omega[p] != 0) continue;
        for (std::uint64_t m = p; m <= x; m += p) ++omega[m];
        for (std::uint64_t m = p * p; m <= x; m += p * p) squarefree[m] = false;
    }
    std::uint64_t total = 0;
    for (std::uint64_t n = 1; n <= x; ++n)
        if (squarefree[n]) total += omega[n];
    return total;
}

// sum of omega(n) over powerful n <= x, n = a^2 b^3 with b squarefree
std::uint64_t powerful_omega_sum(std::uint64_t x) {
    std::uint64_t total = 0;
    for (std::uint64_t b = 1; b * b * b <= x; ++b) {
        if (oracle::mobius(b) == 0) continue;
        for (std::uint64_t a = 1; a * a * b * b * b <= x; ++a) total += oracle::factor(a * a * b * b * b).size();
    }
    return total;
}

}  // namespace

TEST_CASE("mean of omega: sums are exact") {
    const auto z = MonoidInstance::integers(100'000'000);
    const auto free2 = mean_omega_check(z, 10'000'000, SubsetSpec::h_free(2));
    CHECK(free2.empirical_sum == squarefree_omega_sum(10'000'000));
    CHECK(free2.count == count(z, 10'000'000, SubsetSpec::h_free(2)));
    CHECK(free2.relative_gap ==
          doctest::Approx(static_cast<double>(std::fabs(free2.empirical_sum / free2.predicted - 1))));
    const auto full2 = mean_omega_check(z, 100'000'000, SubsetSpec::h_full(2));
    CHECK(full2.empirical_sum == powerful_omega_sum(100'000'000));
    CHECK(full2.count == oracle::powerful_count(100'000'000));

    // predictions rebuilt from the constants they report
    const Real L = std::log(std::log(1e7L));
    CHECK(static_cast<double>(free2.predicted) ==
          doctest::Approx(static_cast<double>(1e7L / free2.density_constant.value *
                                              (L + free2.second_constant.value))));

    // tiny x: numbers only, no claim
    const auto tiny = mean_omega_check(z, 10, SubsetSpec::h_free(2));
    CHECK(tiny.count == 7);
    CHECK(tiny.empirical_sum == 8);
    CHECK(std::isfinite(tiny.predicted));

    CHECK(code_of([&] { mean_omega_check(z, 1000, SubsetSpec::all()); }) == ErrorCode::UnsupportedSubset);
}

// The next order terms are x / log x (h-free) and x^(1/2) / log x (h-full);
// at these x they contribute about +1.8% and -13%.
TEST_CASE("mean of omega within 1% (hfree:2, 10^7) and 3% (hfull:2, 10^8)" * doctest::should_fail()) {
    const auto z = MonoidInstance::integers(100'000'000);
    CHECK(mean_omega_check(z, 10'000'000, SubsetSpec::h_free(2)).relative_gap < 0.01);
    CHECK(mean_omega_check(z, 100'000'000, SubsetSpec::h_full(2)).relative_gap < 0.03);
}

TEST_CASE("mean of omega: the two-term gap closes as x grows") {
    const auto z = MonoidInstance::integers(100'000'000);
    Real prev = 1;
    for (std::uint64_t x : {10'000ull, 1'000'000ull, 100'000'000ull}) {
        const auto gap = mean_omega_check(z, x, SubsetSpec::h_free(2)).relative_gap;
        CHECK(gap < prev);
        prev = gap;
    }
    prev = 1;
    for (std::uint64_t x : {1'000'000ull, 100'000'000ull, 10'000'000'000ull, 1'000'000'000'000ull}) {
        const auto gap = mean_omega_check(z, x, SubsetSpec::h_full(2)).relative_gap;
        CHECK(gap < prev);
        prev = gap;
    }
}
