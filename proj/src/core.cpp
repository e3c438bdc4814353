#include "ekmonoid/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace ekmonoid {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
        case ErrorCode::DivergentInput: return "DIVERGENT_INPUT";
        case ErrorCode::UnsupportedSubset: return "UNSUPPORTED_SUBSET";
        case ErrorCode::InvalidNormalizer: return "INVALID_NORMALIZER";
        case ErrorCode::EmptySample: return "EMPTY_SAMPLE";
        case ErrorCode::Unsupported: return "UNSUPPORTED";
        case ErrorCode::ParseError: return "PARSE_ERROR";
        case ErrorCode::InvalidCertificate: return "INVALID_CERTIFICATE";
        case ErrorCode::TheoremPairing: return "THEOREM_PAIRING";
        case ErrorCode::NumericFailure: return "NUMERIC_FAILURE";
    }
    return "UNKNOWN";
}

// --- PrimeId ---------------------------------------------------------------

std::string PrimeId::to_string() const {
    if (*this == infinity()) return "inf";
    if (minor == 0) return std::to_string(major);
    return std::to_string(major) + "." + std::to_string(minor);
}

namespace {

template <class T>
T parse_unsigned(std::string_view text, std::string_view what) {
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
        fail(ErrorCode::ParseError, "malformed " + std::string(what) + ": '" + std::string(text) + "'");
    return value;
}

}  // namespace

PrimeId PrimeId::parse(std::string_view text) {
    if (text == "inf") return infinity();
    const auto dot = text.find('.');
    if (dot == std::string_view::npos) return {parse_unsigned<std::uint64_t>(text, "prime id"), 0};
    PrimeId id{parse_unsigned<std::uint64_t>(text.substr(0, dot), "prime id"),
               parse_unsigned<std::uint32_t>(text.substr(dot + 1), "prime id")};
    if (id.minor == 0) fail(ErrorCode::ParseError, "non-canonical prime id '" + std::string(text) + "'");
    return id;
}

// --- Factorization ---------------------------------------------------------

Factorization::Factorization(std::vector<Term> terms) : terms_(std::move(terms)) {
    std::sort(terms_.begin(), terms_.end());
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        require(terms_[i].exponent >= 1, ErrorCode::InvalidArgument, "stored exponent must be >= 1");
        require(terms_[i].prime.norm >= 2, ErrorCode::InvalidArgument, "prime norm must be >= 2");
        if (i > 0)
            require(terms_[i - 1].prime.id != terms_[i].prime.id, ErrorCode::InvalidArgument,
                    "prime " + terms_[i].prime.id.to_string() + " repeated");
    }
}

std::uint32_t Factorization::exponent_of(const PrimeRef& p) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), p,
                               [](const Term& t, const PrimeRef& q) { return t.prime < q; });
    return (it != terms_.end() && it->prime == p) ? it->exponent : 0;
}

Factorization operator+(const Factorization& a, const Factorization& b) {
    std::vector<Term> out;
    out.reserve(a.size() + b.size());
    auto i = a.terms_.begin();
    auto j = b.terms_.begin();
    while (i != a.terms_.end() || j != b.terms_.end()) {
        if (j == b.terms_.end() || (i != a.terms_.end() && i->prime < j->prime)) {
            out.push_back(*i++);
        } else if (i == a.terms_.end() || j->prime < i->prime) {
            out.push_back(*j++);
        } else {
            out.push_back({i->prime, i->exponent + j->exponent});
            ++i;
            ++j;
        }
    }
    Factorization f;
    f.terms_ = std::move(out);
    return f;
}

// --- statistics ------------------------------------------------------------

BigInt norm(Terms f) {
    BigInt n = 1;
    for (const auto& t : f) {
        BigInt p = t.prime.norm;
        n *= boost::multiprecision::pow(p, t.exponent);
    }
    return n;
}

std::uint32_t omega(Terms f) { return static_cast<std::uint32_t>(f.size()); }

std::uint64_t big_omega(Terms f) {
    std::uint64_t s = 0;
    for (const auto& t : f) s += t.exponent;
    return s;
}

std::uint32_t omega_k(Terms f, std::uint32_t k) {
    require(k >= 1, ErrorCode::InvalidArgument, "omega_k requires k >= 1");
    return static_cast<std::uint32_t>(
        std::count_if(f.begin(), f.end(), [k](const Term& t) { return t.exponent == k; }));
}

Factorization project_k(Terms f, std::uint32_t k) {
    require(k >= 1, ErrorCode::InvalidArgument, "project_k requires k >= 1");
    std::vector<Term> kept;
    for (const auto& t : f)
        if (t.exponent == k) kept.push_back(t);
    return Factorization(std::move(kept));
}

Real log_divisor_count(Terms f) {
    Real s = 0;
    for (const auto& t : f) s += std::log(static_cast<Real>(t.exponent) + 1);
    return s;
}

std::int64_t omega_T(Terms f) {
    std::int64_t s = 0;
    for (const auto& t : f) s += (t.exponent % 2 == 1) ? 1 : -1;
    return s;
}

Real omega_weighted(Terms f, const WeightSequence& a) {
    Real s = 0;
    for (const auto& t : f) s += a[t.exponent];
    return s;
}

Rational omega_weighted_exact(Terms f, const WeightSequence& a) {
    require(a.is_exact(), ErrorCode::InvalidArgument,
            "weight sequence '" + a.name() + "' has no exact coefficients");
    Rational s = 0;
    for (const auto& t : f) s += *a.exact(t.exponent);
    return s;
}

bool is_h_free(Terms f, std::uint32_t h) {
    require(h >= 2, ErrorCode::InvalidArgument, "h-free requires h >= 2");
    return std::all_of(f.begin(), f.end(), [h](const Term& t) { return t.exponent <= h - 1; });
}

bool is_h_full(Terms f, std::uint32_t h) {
    require(h >= 1, ErrorCode::InvalidArgument, "h-full requires h >= 1");
    return std::all_of(f.begin(), f.end(), [h](const Term& t) { return t.exponent >= h; });
}

std::uint32_t max_exponent(Terms f) {
    std::uint32_t m = 0;
    for (const auto& t : f) m = std::max(m, t.exponent);
    return m;
}

// --- weight sequences --------------------------------------------------------

bool GrowthCertificate::holds() const {
    if (!(B > 0) || !(alpha > 0) || k < 1) return false;
    const Real bound = std::pow(2.0L, 1.0L / static_cast<Real>(k) - alpha);
    return B <= bound * (1 + 64 * std::numeric_limits<Real>::epsilon());
}

namespace {

GrowthCertificate standard_certificate(unsigned k) {
    // Polynomially bounded sequences satisfy a_i << 2^(i/(2k)).
    const Real alpha = 1.0L / (2.0L * k);
    return {std::pow(2.0L, alpha), alpha, k};
}

}  // namespace

WeightSequence::WeightSequence(Kind kind, std::string name, std::function<Real(std::uint32_t)> decimal,
                               std::function<Rational(std::uint32_t)> exact, GrowthCertificate growth)
    : kind_(kind), name_(std::move(name)), decimal_(std::move(decimal)), exact_(std::move(exact)),
      growth_(growth) {
    require(growth_.holds(), ErrorCode::InvalidCertificate,
            "growth certificate for '" + name_ + "' violates B <= 2^(1/k - alpha)");
}

WeightSequence WeightSequence::all_ones(unsigned k) {
    return {Kind::AllOnes, "omega", [](std::uint32_t) { return Real(1); },
            [](std::uint32_t) { return Rational(1); }, standard_certificate(k)};
}

WeightSequence WeightSequence::linear(unsigned k) {
    return {Kind::Linear, "bigomega", [](std::uint32_t i) { return Real(i); },
            [](std::uint32_t i) { return Rational(i); }, standard_certificate(k)};
}

WeightSequence WeightSequence::log_divisor(unsigned k) {
    return {Kind::LogDivisor, "logd", [](std::uint32_t i) { return std::log(Real(i) + 1); }, nullptr,
            standard_certificate(k)};
}

WeightSequence WeightSequence::alternating(unsigned k) {
    return {Kind::Alternating, "omegaT", [](std::uint32_t i) { return Real(i % 2 == 1 ? 1 : -1); },
            [](std::uint32_t i) { return Rational(i % 2 == 1 ? 1 : -1); }, standard_certificate(k)};
}

WeightSequence WeightSequence::indicator(unsigned index) {
    require(index >= 1, ErrorCode::InvalidArgument, "indicator index must be >= 1");
    return {Kind::Indicator, "omega_k:" + std::to_string(index),
            [index](std::uint32_t i) { return Real(i == index ? 1 : 0); },
            [index](std::uint32_t i) { return Rational(i == index ? 1 : 0); },
            standard_certificate(index)};
}

WeightSequence WeightSequence::from_terms(std::map<std::uint32_t, Rational> coefficients,
                                          GrowthCertificate growth) {
    for (const auto& [i, _] : coefficients)
        require(i >= 1, ErrorCode::InvalidArgument, "weight index must be >= 1");
    auto shared = std::make_shared<const std::map<std::uint32_t, Rational>>(std::move(coefficients));
    auto exact = [shared](std::uint32_t i) {
        auto it = shared->find(i);
        return it == shared->end() ? Rational(0) : it->second;
    };
    auto decimal = [exact](std::uint32_t i) {
        const Rational r = exact(i);
        return static_cast<Real>(r.numerator()) / static_cast<Real>(r.denominator());
    };
    return {Kind::Custom, "weights", decimal, exact, growth};
}

std::optional<Rational> WeightSequence::exact(std::uint32_t i) const {
    if (!exact_) return std::nullopt;
    return exact_(i);
}

WeightSequence WeightSequence::operator+(const WeightSequence& other) const {
    auto lhs = decimal_;
    auto rhs = other.decimal_;
    std::function<Rational(std::uint32_t)> exact;
    if (exact_ && other.exact_) {
        auto el = exact_;
        auto er = other.exact_;
        exact = [el, er](std::uint32_t i) { return el(i) + er(i); };
    }
    const GrowthCertificate& g = growth_.B >= other.growth_.B ? growth_ : other.growth_;
    return {Kind::Sum, name_ + "+" + other.name_,
            [lhs, rhs](std::uint32_t i) { return lhs(i) + rhs(i); }, exact, g};
}

// --- serialization -----------------------------------------------------------

std::string format_element(std::uint64_t n, Terms f) {
    std::string out = std::to_string(n);
    out += '\t';
    if (f.empty()) {
        out += '-';
        return out;
    }
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (i) out += ',';
        out += f[i].prime.id.to_string();
        out += '^';
        out += std::to_string(f[i].exponent);
    }
    return out;
}

std::string format_element(const Factorization& f) {
    const BigInt n = norm(f);
    std::string out = n.str();
    out += format_element(1, f).substr(1);
    return out;
}

Factorization parse_element(std::string_view line, const PrimeResolver& resolve) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto tab = line.find('\t');
    require(tab != std::string_view::npos, ErrorCode::ParseError, "missing TAB in element line");
    const BigInt stated(std::string(line.substr(0, tab)));
    const std::string_view body = line.substr(tab + 1);
    std::vector<Term> terms;
    if (body != "-") {
        std::size_t pos = 0;
        while (pos <= body.size()) {
            auto comma = body.find(',', pos);
            if (comma == std::string_view::npos) comma = body.size();
            const std::string_view item = body.substr(pos, comma - pos);
            const auto caret = item.find('^');
            require(caret != std::string_view::npos, ErrorCode::ParseError,
                    "term '" + std::string(item) + "' lacks '^'");
            const PrimeId id = PrimeId::parse(item.substr(0, caret));
            const auto exponent = parse_unsigned<std::uint32_t>(item.substr(caret + 1), "exponent");
            const auto prime = resolve(id);
            require(prime.has_value(), ErrorCode::ParseError, "unknown prime id " + id.to_string());
            terms.push_back({*prime, exponent});
            pos = comma + 1;
        }
    }
    Factorization f(std::move(terms));
    require(norm(f) == stated, ErrorCode::ParseError,
            "stated norm " + stated.str() + " does not match factorization");
    return f;
}

}  // namespace ekmonoid
