#include "ekmonoid/instances.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>

#include "ekmonoid/primes.hpp"

namespace ekmonoid {

namespace {

// Rosser-Schoenfeld: pi(t) < 1.25506 t / log t for t > 1.
constexpr Real kPrimeCountConstant = 1.25506L;

bool is_prime_u64(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t p : {2u, 3u, 5u, 7u, 11u, 13u})
        if (n % p == 0) return n == p;
    for (std::uint64_t d = 17; d * d <= n; d += 2)
        if (n % d == 0) return false;
    return true;
}

// alpha C T^(1-alpha) / ((alpha-1) log T): bound for sum_{N(p)>T} N(p)^-alpha
// when the number of primes of norm <= t is at most C t / log t.
Real chebyshev_tail(Real C, Real alpha, std::uint64_t T) {
    const Real t = std::max<Real>(static_cast<Real>(T), 2);
    return alpha * C * std::pow(t, 1 - alpha) / ((alpha - 1) * std::log(t));
}

std::uint64_t floor_log(std::uint64_t q, std::uint64_t x) {
    std::uint64_t n = 0;
    for (std::uint64_t v = q; v <= x; ++n) {
        if (v > x / q) {
            ++n;
            break;
        }
        v *= q;
    }
    return n;
}

}  // namespace

std::uint64_t NormLattice::floor(std::uint64_t x) const {
    if (!is_powers()) return x;
    std::uint64_t v = 1;
    while (v <= x / base) v *= base;
    return v;
}

// --- prime sources -------------------------------------------------------------

struct PrimeSource {
    std::string name;
    InstanceKind kind;
    Real kappa;
    Real theta;
    std::uint64_t q = 0;
    std::uint64_t limit;

    PrimeSource(std::string n, InstanceKind k, Real ka, Real th, std::uint64_t lim)
        : name(std::move(n)), kind(k), kappa(ka), theta(th), limit(lim) {}
    virtual ~PrimeSource() = default;

    virtual std::vector<PrimeRef> primes(std::uint64_t lo, std::uint64_t hi) const = 0;
    virtual void norm_classes(std::uint64_t lo, std::uint64_t hi,
                              const std::function<void(std::uint64_t, std::uint64_t)>& fn) const {
        const auto list = primes(lo, hi);
        for (std::size_t i = 0; i < list.size();) {
            std::size_t j = i;
            while (j < list.size() && list[j].norm == list[i].norm) ++j;
            fn(list[i].norm, j - i);
            i = j;
        }
    }
    virtual std::optional<PrimeRef> resolve(const PrimeId& id) const = 0;
    virtual TailEstimate tail(Real alpha, std::uint64_t T) const = 0;
    virtual std::optional<std::uint64_t> count_all(std::uint64_t) const { return std::nullopt; }
};

namespace {

class IntegerSource final : public PrimeSource {
public:
    explicit IntegerSource(std::uint64_t limit)
        : PrimeSource("integers", InstanceKind::Integers, 1, 0, limit) {}

    std::vector<PrimeRef> primes(std::uint64_t lo, std::uint64_t hi) const override {
        std::vector<PrimeRef> out;
        for_each_prime(lo, std::min(hi, limit), [&](std::uint64_t p) { out.push_back({{p, 0}, p}); });
        return out;
    }
    void norm_classes(std::uint64_t lo, std::uint64_t hi,
                      const std::function<void(std::uint64_t, std::uint64_t)>& fn) const override {
        for_each_prime(lo, std::min(hi, limit), [&](std::uint64_t p) { fn(p, 1); });
    }
    std::optional<PrimeRef> resolve(const PrimeId& id) const override {
        if (id.minor != 0 || id.major > limit || !is_prime_u64(id.major)) return std::nullopt;
        return PrimeRef{id, id.major};
    }
    TailEstimate tail(Real alpha, std::uint64_t T) const override {
        return {chebyshev_tail(kPrimeCountConstant, alpha, T), true};
    }
    std::optional<std::uint64_t> count_all(std::uint64_t x) const override { return x; }
};

// Prime ideals of Z[i]: (1+i) of norm 2; two conjugate ideals of norm p for
// p = 1 mod 4; the inert (p) of norm p^2 for p = 3 mod 4.
class GaussianSource final : public PrimeSource {
public:
    explicit GaussianSource(std::uint64_t limit)
        : PrimeSource("gaussian", InstanceKind::Gaussian, std::numbers::pi_v<Real> / 4, 1.0L / 3,
                      limit) {}

    std::vector<PrimeRef> primes(std::uint64_t lo, std::uint64_t hi) const override {
        hi = std::min(hi, limit);
        lo = std::max<std::uint64_t>(lo, 2);
        std::vector<PrimeRef> out;
        if (lo > hi) return out;
        std::vector<std::uint64_t> inert;
        const std::uint64_t r_lo = integer_root(lo - 1, 2) + 1;  // smallest r with r^2 >= lo
        for_each_prime(std::max<std::uint64_t>(r_lo, 3), integer_root(hi, 2), [&](std::uint64_t p) {
            if (p % 4 == 3) inert.push_back(p);
        });
        std::size_t k = 0;
        auto flush_inert = [&](std::uint64_t upto) {
            while (k < inert.size() && inert[k] * inert[k] <= upto) {
                out.push_back({{inert[k], 0}, inert[k] * inert[k]});
                ++k;
            }
        };
        for_each_prime(lo, hi, [&](std::uint64_t p) {
            if (p % 4 == 3) return;
            flush_inert(p - 1);
            out.push_back({{p, 0}, p});
            if (p % 4 == 1) out.push_back({{p, 1}, p});
        });
        flush_inert(hi);
        return out;
    }
    std::optional<PrimeRef> resolve(const PrimeId& id) const override {
        const std::uint64_t p = id.major;
        if (!is_prime_u64(p)) return std::nullopt;
        if (p == 2) {
            if (id.minor != 0) return std::nullopt;
            return PrimeRef{id, 2};
        }
        if (p % 4 == 1) {
            if (id.minor > 1 || p > limit) return std::nullopt;
            return PrimeRef{id, p};
        }
        if (id.minor != 0 || p > integer_root(limit, 2)) return std::nullopt;
        return PrimeRef{id, p * p};
    }
    TailEstimate tail(Real alpha, std::uint64_t T) const override {
        // At most two prime ideals per rational prime below the norm.
        return {chebyshev_tail(2 * kPrimeCountConstant, alpha, T), true};
    }
};

std::uint64_t checked_pow_or_throw(std::uint64_t q, unsigned d) {
    auto v = checked_pow(q, d, UINT64_MAX);
    require(v.has_value(), ErrorCode::InvalidArgument,
            "q^" + std::to_string(d) + " exceeds 64-bit norms");
    return *v;
}

class PolynomialSource : public PrimeSource {
public:
    PolynomialSource(std::uint64_t q_, unsigned max_degree, bool with_infinity)
        : PrimeSource(with_infinity ? "p1:q=" + std::to_string(q_) : "fq:q=" + std::to_string(q_),
                      with_infinity ? InstanceKind::ProjectiveLine : InstanceKind::PolynomialsFq,
                      with_infinity ? std::pow(Real(q_) / Real(q_ - 1), 2) : Real(q_) / Real(q_ - 1),
                      with_infinity ? 0.1L : 0, checked_pow_or_throw(q_, max_degree)),
          max_degree_(max_degree),
          infinity_(with_infinity) {
        q = q_;
        counts_.push_back(0);
        for (unsigned d = 1; d <= max_degree; ++d) counts_.push_back(irreducible_count(q, d));
    }

    std::vector<PrimeRef> primes(std::uint64_t lo, std::uint64_t hi) const override {
        std::vector<PrimeRef> out;
        norm_classes(lo, hi, [&](std::uint64_t norm, std::uint64_t count) {
            const unsigned d = degree_of(norm);
            if (infinity_ && d == 1) {
                out.push_back({PrimeId::infinity(), norm});
                --count;
            }
            require(count <= UINT32_MAX, ErrorCode::Unsupported, "too many primes of one degree to list");
            for (std::uint64_t i = 0; i < count; ++i)
                out.push_back({{d, static_cast<std::uint32_t>(i)}, norm});
        });
        return out;
    }
    void norm_classes(std::uint64_t lo, std::uint64_t hi,
                      const std::function<void(std::uint64_t, std::uint64_t)>& fn) const override {
        std::uint64_t norm = q;
        for (unsigned d = 1; d <= max_degree_; ++d) {
            if (norm > hi) break;
            if (norm >= lo) fn(norm, counts_[d] + (infinity_ && d == 1 ? 1 : 0));
            if (d < max_degree_) norm *= q;
        }
    }
    std::optional<PrimeRef> resolve(const PrimeId& id) const override {
        if (infinity_ && id == PrimeId::infinity()) return PrimeRef{id, q};
        if (id.major < 1 || id.major > max_degree_ || id.minor >= counts_[id.major])
            return std::nullopt;
        return PrimeRef{id, checked_pow_or_throw(q, static_cast<unsigned>(id.major))};
    }
    TailEstimate tail(Real alpha, std::uint64_t T) const override {
        // pi_q(d) <= q^d / d, summed geometrically over degrees beyond T.
        const unsigned D = static_cast<unsigned>(floor_log(q, T));
        const Real ratio = std::pow(Real(q), 1 - alpha);
        const Real first = std::pow(ratio, Real(D + 1));
        return {first / ((D + 1) * (1 - ratio)), true};
    }
    std::optional<std::uint64_t> count_all(std::uint64_t x) const override {
        const auto n = floor_log(q, x);
        // sum_{m<=n} (number of elements of degree m)
        BigInt total = 0;
        BigInt qm = 1;
        for (std::uint64_t m = 0; m <= n; ++m) {
            total += infinity_ ? (qm * q - 1) / (q - 1) : qm;
            qm *= q;
        }
        if (total > UINT64_MAX) return std::nullopt;
        return static_cast<std::uint64_t>(total);
    }

private:
    unsigned degree_of(std::uint64_t norm) const { return static_cast<unsigned>(floor_log(q, norm)); }

    unsigned max_degree_;
    bool infinity_;
    std::vector<std::uint64_t> counts_;
};

class CustomSource final : public PrimeSource {
public:
    CustomSource(std::string name, std::vector<PrimeRef> list, Real kappa, Real theta)
        : PrimeSource(std::move(name), InstanceKind::Custom, kappa, theta,
                      list.empty() ? 1 : list.back().norm),
          list_(std::move(list)) {
        for (std::size_t i = 0; i < list_.size(); ++i) {
            require(list_[i].norm >= 2, ErrorCode::InvalidArgument, "prime norms must be >= 2");
            if (i > 0)
                require(list_[i - 1] < list_[i], ErrorCode::InvalidArgument,
                        "custom primes must be strictly increasing in (norm, id)");
            by_id_.emplace(list_[i].id, list_[i]);
        }
        require(by_id_.size() == list_.size(), ErrorCode::InvalidArgument, "duplicate prime ids");
        // Empirical constant C in #{p : N(p) <= t} <= C t / log t over the list.
        for (std::size_t i = 0; i < list_.size(); ++i) {
            const Real t = static_cast<Real>(list_[i].norm);
            if (t > 2)
                density_c_ = std::max(density_c_, Real(i + 1) * std::log(t) / t);
        }
    }

    std::vector<PrimeRef> primes(std::uint64_t lo, std::uint64_t hi) const override {
        auto first = std::lower_bound(list_.begin(), list_.end(), lo,
                                      [](const PrimeRef& p, std::uint64_t v) { return p.norm < v; });
        auto last = std::upper_bound(list_.begin(), list_.end(), hi,
                                     [](std::uint64_t v, const PrimeRef& p) { return v < p.norm; });
        return {first, std::max(first, last)};
    }
    std::optional<PrimeRef> resolve(const PrimeId& id) const override {
        auto it = by_id_.find(id);
        if (it == by_id_.end()) return std::nullopt;
        return it->second;
    }
    TailEstimate tail(Real alpha, std::uint64_t T) const override {
        return {chebyshev_tail(std::max<Real>(density_c_, 1), alpha, T), false};
    }

private:
    std::vector<PrimeRef> list_;
    std::map<PrimeId, PrimeRef> by_id_;
    Real density_c_ = 0;
};

}  // namespace

// --- MonoidInstance ---------------------------------------------------------------

MonoidInstance::MonoidInstance(std::shared_ptr<const PrimeSource> source) : source_(std::move(source)) {}

MonoidInstance MonoidInstance::integers(std::uint64_t limit) {
    require(limit >= 2, ErrorCode::InvalidArgument, "limit must be >= 2");
    return MonoidInstance(std::make_shared<IntegerSource>(limit));
}

MonoidInstance MonoidInstance::gaussian(std::uint64_t limit) {
    require(limit >= 2, ErrorCode::InvalidArgument, "limit must be >= 2");
    return MonoidInstance(std::make_shared<GaussianSource>(limit));
}

MonoidInstance MonoidInstance::polynomials_fq(std::uint64_t q, unsigned max_degree) {
    require(q >= 2 && is_prime_power(q), ErrorCode::InvalidArgument, "q must be a prime power >= 2");
    require(max_degree >= 1, ErrorCode::InvalidArgument, "max_degree must be >= 1");
    return MonoidInstance(std::make_shared<PolynomialSource>(q, max_degree, false));
}

MonoidInstance MonoidInstance::projective_line(std::uint64_t q, unsigned max_degree) {
    require(q >= 2 && is_prime_power(q), ErrorCode::InvalidArgument, "q must be a prime power >= 2");
    require(max_degree >= 1, ErrorCode::InvalidArgument, "max_degree must be >= 1");
    return MonoidInstance(std::make_shared<PolynomialSource>(q, max_degree, true));
}

MonoidInstance MonoidInstance::custom(std::string name, std::vector<PrimeRef> primes, Real kappa,
                                      Real theta) {
    require(kappa > 0, ErrorCode::InvalidArgument, "kappa must be positive");
    require(theta >= 0 && theta < 1, ErrorCode::InvalidArgument, "theta must lie in [0, 1)");
    return MonoidInstance(std::make_shared<CustomSource>(std::move(name), std::move(primes), kappa, theta));
}

MonoidInstance MonoidInstance::from_file(const std::string& path, Real kappa, Real theta) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::InvalidArgument, "cannot open prime file '" + path + "'");
    std::vector<PrimeRef> list;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        require(tab != std::string::npos, ErrorCode::ParseError,
                path + ":" + std::to_string(line_no) + ": expected prime_id<TAB>norm");
        try {
            const PrimeId id = PrimeId::parse(std::string_view(line).substr(0, tab));
            const std::uint64_t norm = std::stoull(line.substr(tab + 1));
            list.push_back({id, norm});
        } catch (const Error& e) {
            fail(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const std::exception&) {
            fail(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": bad norm");
        }
    }
    return custom("custom", std::move(list), kappa, theta);
}

const std::string& MonoidInstance::name() const { return source_->name; }
InstanceKind MonoidInstance::kind() const { return source_->kind; }
Real MonoidInstance::kappa() const { return source_->kappa; }
Real MonoidInstance::theta() const { return source_->theta; }
std::uint64_t MonoidInstance::q() const { return source_->q; }
std::uint64_t MonoidInstance::limit() const { return source_->limit; }

NormLattice MonoidInstance::lattice() const {
    if (kind() == InstanceKind::PolynomialsFq || kind() == InstanceKind::ProjectiveLine) return {q()};
    return {};
}

std::vector<PrimeRef> MonoidInstance::primes(std::uint64_t lo, std::uint64_t hi) const {
    return source_->primes(lo, hi);
}

void MonoidInstance::for_each_norm_class(
    std::uint64_t lo, std::uint64_t hi,
    const std::function<void(std::uint64_t, std::uint64_t)>& fn) const {
    source_->norm_classes(lo, hi, fn);
}

std::optional<PrimeRef> MonoidInstance::resolve(const PrimeId& id) const { return source_->resolve(id); }

PrimeResolver MonoidInstance::resolver() const {
    auto src = source_;
    return [src](const PrimeId& id) { return src->resolve(id); };
}

TailEstimate MonoidInstance::prime_tail(Real alpha, std::uint64_t T) const {
    require(alpha > 1, ErrorCode::DivergentInput, "prime tail needs alpha > 1");
    return source_->tail(alpha, T);
}

MonoidInstance MonoidInstance::widened(std::uint64_t limit) const {
    switch (kind()) {
        case InstanceKind::Integers: return integers(limit);
        case InstanceKind::Gaussian: return gaussian(limit);
        case InstanceKind::PolynomialsFq:
            return polynomials_fq(q(), static_cast<unsigned>(floor_log(q(), limit)));
        case InstanceKind::ProjectiveLine:
            return projective_line(q(), static_cast<unsigned>(floor_log(q(), limit)));
        case InstanceKind::Custom: break;
    }
    return *this;
}

std::optional<std::uint64_t> MonoidInstance::count_all(std::uint64_t x) const {
    return source_->count_all(x);
}

// --- factory ----------------------------------------------------------------------

namespace {

std::map<std::string, std::string> parse_options(std::string_view text) {
    std::map<std::string, std::string> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto comma = text.find(',', pos);
        if (comma == std::string_view::npos) comma = text.size();
        const auto item = text.substr(pos, comma - pos);
        const auto eq = item.find('=');
        require(eq != std::string_view::npos && eq > 0, ErrorCode::InvalidArgument,
                "expected key=value in instance options, got '" + std::string(item) + "'");
        out[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
        pos = comma + 1;
    }
    return out;
}

std::uint64_t option_u64(const std::map<std::string, std::string>& opts, const std::string& key) {
    auto it = opts.find(key);
    require(it != opts.end(), ErrorCode::InvalidArgument, "missing instance option '" + key + "'");
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
    require(ec == std::errc{} && ptr == it->second.data() + it->second.size(), ErrorCode::InvalidArgument,
            "instance option '" + key + "' must be an integer");
    return v;
}

Real option_real(const std::map<std::string, std::string>& opts, const std::string& key) {
    auto it = opts.find(key);
    require(it != opts.end(), ErrorCode::InvalidArgument, "missing instance option '" + key + "'");
    try {
        std::size_t used = 0;
        const Real v = std::stold(it->second, &used);
        require(used == it->second.size(), ErrorCode::InvalidArgument, "trailing characters");
        return v;
    } catch (const std::exception&) {
        fail(ErrorCode::InvalidArgument, "instance option '" + key + "' must be a number");
    }
}

void reject_unknown(const std::map<std::string, std::string>& opts,
                    std::initializer_list<std::string_view> known) {
    for (const auto& [k, _] : opts)
        require(std::find(known.begin(), known.end(), k) != known.end(), ErrorCode::InvalidArgument,
                "unknown instance option '" + k + "'");
}

}  // namespace

MonoidInstance make_instance(std::string_view spec, std::uint64_t limit) {
    limit = std::max<std::uint64_t>(limit, 2);
    if (spec == "integers") return MonoidInstance::integers(limit);
    if (spec == "gaussian") return MonoidInstance::gaussian(limit);
    const auto colon = spec.find(':');
    require(colon != std::string_view::npos, ErrorCode::InvalidArgument,
            "unknown instance '" + std::string(spec) + "'");
    const auto head = spec.substr(0, colon);
    const auto opts = parse_options(spec.substr(colon + 1));
    if (head == "fq" || head == "p1") {
        reject_unknown(opts, {"q"});
        const std::uint64_t q = option_u64(opts, "q");
        require(q >= 2 && is_prime_power(q), ErrorCode::InvalidArgument, "q must be a prime power >= 2");
        const unsigned degree = static_cast<unsigned>(std::max<std::uint64_t>(floor_log(q, limit), 1));
        return head == "fq" ? MonoidInstance::polynomials_fq(q, degree)
                            : MonoidInstance::projective_line(q, degree);
    }
    if (head == "custom") {
        reject_unknown(opts, {"file", "kappa", "theta"});
        auto file = opts.find("file");
        require(file != opts.end(), ErrorCode::InvalidArgument, "custom instance needs file=");
        return MonoidInstance::from_file(file->second, option_real(opts, "kappa"),
                                         option_real(opts, "theta"));
    }
    fail(ErrorCode::InvalidArgument, "unknown instance '" + std::string(spec) + "'");
}

// --- arithmetic helpers -------------------------------------------------------------

std::uint64_t gaussian_ideal_count_oracle(std::uint64_t x) {
    // sum_{n<=x} sum_{d|n} chi(d) = sum_{d<=x} chi(d) floor(x/d)
    std::int64_t total = 0;
    for (std::uint64_t d = 1; d <= x; d += 2) {
        const auto term = static_cast<std::int64_t>(x / d);
        total += (d % 4 == 1) ? term : -term;
    }
    return static_cast<std::uint64_t>(total);
}

bool is_prime_power(std::uint64_t q) {
    if (q < 2) return false;
    for (std::uint64_t p = 2; p * p <= q; ++p) {
        if (q % p) continue;
        while (q % p == 0) q /= p;
        return q == 1;
    }
    return true;
}

std::uint64_t irreducible_count(std::uint64_t q, unsigned d) {
    require(q >= 2 && d >= 1, ErrorCode::InvalidArgument, "irreducible_count needs q >= 2, d >= 1");
    // (1/d) sum_{e|d} mu(e) q^(d/e), evaluated in 128 bits.
    unsigned __int128 pos = 0, neg = 0;
    const auto mu = moebius_table(d);
    for (unsigned e = 1; e <= d; ++e) {
        if (d % e || mu[e] == 0) continue;
        unsigned __int128 power = 1;
        for (unsigned i = 0; i < d / e; ++i) {
            power *= q;
            require(power <= (static_cast<unsigned __int128>(1) << 100), ErrorCode::InvalidArgument,
                    "irreducible count overflows");
        }
        (mu[e] > 0 ? pos : neg) += power;
    }
    const unsigned __int128 count = (pos - neg) / d;
    require(count <= UINT64_MAX, ErrorCode::InvalidArgument, "irreducible count overflows 64 bits");
    return static_cast<std::uint64_t>(count);
}

std::vector<std::uint64_t> irreducible_codes(std::uint64_t q, unsigned d) {
    require(is_prime_u64(q), ErrorCode::Unsupported,
            "exhaustive polynomial mode needs a prime field size");
    const auto total = checked_pow(q, d, std::uint64_t{1} << 24);
    require(total.has_value(), ErrorCode::Unsupported, "q^d too large for exhaustive mode");

    // Mark every product g*h with g monic irreducible of degree a <= d/2 and h
    // monic of degree d - a; what remains is irreducible.
    std::vector<bool> reducible(*total, false);
    auto decode = [q](std::uint64_t code, unsigned deg) {
        std::vector<std::uint64_t> c(deg + 1);
        for (unsigned i = 0; i < deg; ++i) {
            c[i] = code % q;
            code /= q;
        }
        c[deg] = 1;
        return c;
    };
    for (unsigned a = 1; 2 * a <= d; ++a) {
        const auto small = irreducible_codes(q, a);
        const std::uint64_t others = *checked_pow(q, d - a, UINT64_MAX);
        for (std::uint64_t g_code : small) {
            const auto g = decode(g_code, a);
            for (std::uint64_t h_code = 0; h_code < others; ++h_code) {
                const auto h = decode(h_code, d - a);
                std::vector<std::uint64_t> prod(d + 1, 0);
                for (unsigned i = 0; i <= a; ++i)
                    for (unsigned j = 0; j <= d - a; ++j) prod[i + j] = (prod[i + j] + g[i] * h[j]) % q;
                std::uint64_t code = 0;
                for (unsigned i = d; i-- > 0;) code = code * q + prod[i];
                reducible[code] = true;
            }
        }
    }
    std::vector<std::uint64_t> out;
    for (std::uint64_t code = 0; code < *total; ++code)
        if (!reducible[code]) out.push_back(code);
    return out;
}

}  // namespace ekmonoid
