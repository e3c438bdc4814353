#include "ekmonoid/cli.hpp"

#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ekmonoid/constants.hpp"
#include "ekmonoid/instances.hpp"
#include "ekmonoid/probmodel.hpp"
#include "ekmonoid/sieve.hpp"
#include "ekmonoid/stats.hpp"

namespace ekmonoid::cli {

using Json = nlohmann::ordered_json;

int exit_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnsupportedSubset:
        case ErrorCode::Unsupported:
        case ErrorCode::TheoremPairing: return kUnsupported;
        case ErrorCode::NumericFailure:
        case ErrorCode::EmptySample: return kNumeric;
        default: return kInvalidConfig;
    }
}

std::uint64_t parse_exact_integer(std::string_view text) {
    const std::string shown(text);
    auto bad = [&](const char* why) { fail(ErrorCode::InvalidArgument, "'" + shown + "': " + why); };
    if (text.empty()) bad("empty number");
    if (text.front() == '+') text.remove_prefix(1);
    if (!text.empty() && text.front() == '-') bad("must be non-negative");

    std::string digits;
    long long exponent = 0;
    bool seen_dot = false, seen_digit = false;
    std::size_t i = 0;
    for (; i < text.size(); ++i) {
        const char c = text[i];
        if (c >= '0' && c <= '9') {
            digits.push_back(c);
            seen_digit = true;
            if (seen_dot) --exponent;
        } else if (c == '.' && !seen_dot) {
            seen_dot = true;
        } else {
            break;
        }
    }
    if (!seen_digit) bad("not a number");
    if (i < text.size()) {
        if (text[i] != 'e' && text[i] != 'E') bad("not a number");
        auto rest = text.substr(i + 1);
        if (!rest.empty() && rest.front() == '+') rest.remove_prefix(1);
        long long e = 0;
        auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), e);
        if (ec != std::errc{} || ptr != rest.data() + rest.size() || rest.empty()) bad("bad exponent");
        if (e > 100 || e < -100) bad("exponent out of range");
        exponent += e;
    }
    // Drop trailing digits that the negative exponent removes; they must be 0.
    while (exponent < 0) {
        if (digits.empty()) break;
        if (digits.back() != '0') bad("not an integer");
        digits.pop_back();
        ++exponent;
    }
    std::uint64_t v = 0;
    auto push = [&](unsigned d) {
        if (v > (UINT64_MAX - d) / 10) bad("does not fit in 64 bits");
        v = v * 10 + d;
    };
    for (char c : digits) push(static_cast<unsigned>(c - '0'));
    for (long long k = 0; k < exponent; ++k) push(0);
    return v;
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

Real parse_real(std::string_view text, const std::string& what) {
    const std::string s(text);
    char* end = nullptr;
    errno = 0;
    const Real v = std::strtold(s.c_str(), &end);
    require(!s.empty() && end == s.c_str() + s.size() && errno == 0 && std::isfinite(v),
            ErrorCode::InvalidArgument, "bad decimal for " + what + ": '" + s + "'");
    return v;
}

}  // namespace

WeightSequence weights_file_parse(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::InvalidArgument, "cannot open weights file '" + path + "'");
    std::optional<GrowthCertificate> cert;
    std::map<std::uint32_t, Rational> coefficients;
    std::string raw;
    int line_no = 0;
    auto parse_fail = [&](const std::string& why) {
        fail(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": " + why);
    };
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (!cert) {
            std::istringstream fields(line);
            std::string field;
            std::optional<Real> B, alpha;
            std::optional<unsigned> k;
            while (fields >> field) {
                const auto eq = field.find('=');
                if (eq == std::string::npos) parse_fail("header field '" + field + "' is not key=value");
                const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
                try {
                    if (key == "B") {
                        B = parse_real(value, "B");
                    } else if (key == "alpha") {
                        alpha = parse_real(value, "alpha");
                    } else if (key == "k") {
                        unsigned kv = 0;
                        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), kv);
                        if (ec != std::errc{} || ptr != value.data() + value.size() || kv < 1)
                            parse_fail("k must be an integer >= 1");
                        k = kv;
                    } else {
                        parse_fail("unknown header key '" + key + "'");
                    }
                } catch (const Error& e) {
                    if (e.code() == ErrorCode::ParseError) throw;
                    parse_fail(e.what());
                }
            }
            if (!B || !alpha || !k) parse_fail("header must give B=, alpha= and k=");
            cert = GrowthCertificate{*B, *alpha, *k};
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string::npos) parse_fail("expected k<TAB>a_k");
        const std::string idx = trim(line.substr(0, tab)), val = trim(line.substr(tab + 1));
        std::uint32_t i = 0;
        auto [ptr, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), i);
        if (ec != std::errc{} || ptr != idx.data() + idx.size() || i < 1) parse_fail("bad index '" + idx + "'");
        if (coefficients.count(i)) parse_fail("index " + idx + " repeated");
        std::int64_t num = 0, den = 1;
        const auto slash = val.find('/');
        const std::string ns = val.substr(0, slash);
        auto r1 = std::from_chars(ns.data(), ns.data() + ns.size(), num);
        if (r1.ec != std::errc{} || r1.ptr != ns.data() + ns.size() || ns.empty())
            parse_fail("bad coefficient '" + val + "'");
        if (slash != std::string::npos) {
            const std::string ds = val.substr(slash + 1);
            auto r2 = std::from_chars(ds.data(), ds.data() + ds.size(), den);
            if (r2.ec != std::errc{} || r2.ptr != ds.data() + ds.size() || ds.empty() || den == 0)
                parse_fail("bad coefficient '" + val + "'");
        }
        coefficients[i] = Rational(num, den);
    }
    if (!cert) {
        line_no = std::max(line_no, 1);
        parse_fail("missing header B=<dec> alpha=<dec> k=<int>");
    }
    return WeightSequence::from_terms(std::move(coefficients), *cert);
}

int output_digits() {
    const char* env = std::getenv("EKMONOID_PRECISION");
    int digits = 25;
    if (env && *env) {
        const std::string_view s(env);
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), digits);
        require(ec == std::errc{} && ptr == s.data() + s.size() && digits >= 1, ErrorCode::InvalidArgument,
                "EKMONOID_PRECISION must be a positive integer");
    }
    return std::min(digits, kAchievedDigits);
}

void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        require(static_cast<bool>(f), ErrorCode::InvalidArgument, "cannot write '" + path + "'");
        f << content;
        f.flush();
        require(static_cast<bool>(f), ErrorCode::InvalidArgument, "write to '" + path + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        fail(ErrorCode::InvalidArgument, "cannot move report into '" + path + "'");
    }
}

namespace {

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

std::string decimal(Real v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*Lg", digits, v);
    return buf;
}

// JSON numbers are IEEE doubles; rounded to the requested digits first so
// lowering EKMONOID_PRECISION shortens them too.
Json num(Real v) {
    if (!std::isfinite(v)) return nullptr;
    const int d = std::min(output_digits(), 17);
    return std::strtod(decimal(v, d).c_str(), nullptr);
}

Json triple(std::string id, Real computed, Real predicted) {
    return Json{{"formula_id", std::move(id)}, {"computed", num(computed)}, {"predicted", num(predicted)}};
}

Json constant_json(const ConstantResult& r) {
    return Json{{"value", num(r.value)},
                {"value_text", decimal(r.value, output_digits())},
                {"truncation_norm", r.truncation_norm},
                {"tail_bound", num(r.tail_bound)},
                {"tail_kind", std::string(tail_kind_name(r.tail_kind))},
                {"target_met", r.target_met},
                {"shards", r.shards}};
}

std::string scalar_text(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_null()) return "nan";
    return v.dump();
}

std::string render(const Json& doc, const std::string& format) {
    if (format == "json") return doc.dump(2) + "\n";
    const char sep = format == "csv" ? ',' : '\t';
    std::string out = std::string("key") + sep + "value\n";
    const Json flat = doc.flatten();
    for (const auto& [key, value] : flat.items()) {
        std::string v = scalar_text(value);
        if (sep == ',' && v.find_first_of(",\"") != std::string::npos) {
            std::string q = "\"";
            for (char c : v) q += c == '"' ? std::string("\"\"") : std::string(1, c);
            v = q + "\"";
        }
        out += key + sep + v + "\n";
    }
    return out;
}

struct Common {
    std::string instance = "integers";
    std::string x_text;
    std::string subset = "all";
    std::string format = "json";
    std::string out_path;
    unsigned shards = 1;
};

void emit(const Json& doc, const Common& c, std::ostream& out) {
    const std::string text = render(doc, c.format);
    if (c.out_path.empty())
        out << text;
    else
        write_atomic(c.out_path, text);
}

void check_format(const std::string& f) {
    require(f == "json" || f == "tsv" || f == "csv", ErrorCode::InvalidArgument,
            "--format must be json, tsv or csv");
}

std::uint64_t resolve_x(const Common& c) {
    require(!c.x_text.empty(), ErrorCode::InvalidArgument, "--x is required");
    const std::uint64_t x = parse_exact_integer(c.x_text);
    require(x >= 1, ErrorCode::InvalidArgument, "x must be >= 1");
    return x;
}

std::vector<PrimeRef> resolve_primes(const MonoidInstance& inst, const std::string& list) {
    std::vector<PrimeRef> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        auto p = inst.resolve(PrimeId::parse(item));
        require(p.has_value(), ErrorCode::InvalidArgument, "'" + item + "' is not a prime of " + inst.name());
        out.push_back(*p);
    }
    return out;
}

Json base_json(const MonoidInstance& inst, std::uint64_t x, const SubsetSpec& spec) {
    return Json{{"instance", inst.name()}, {"x", x}, {"subset", spec.to_string()}};
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

void do_enumerate(const Common& c, std::ostream& out) {
    require(c.format == "tsv", ErrorCode::InvalidArgument, "enumerate writes tsv only");
    const std::uint64_t x = resolve_x(c);
    const auto inst = make_instance(c.instance, x);
    const auto spec = SubsetSpec::parse(c.subset);
    auto write_all = [&](std::ostream& os) {
        enumerate(inst, x, spec, [&](const ElementView& v) { os << format_element(v.norm, v.terms) << '\n'; });
    };
    if (c.out_path.empty()) {
        write_all(out);
        return;
    }
    const std::string tmp = c.out_path + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        require(static_cast<bool>(f), ErrorCode::InvalidArgument, "cannot write '" + c.out_path + "'");
        try {
            write_all(f);
        } catch (...) {
            f.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw;
        }
        f.flush();
        require(static_cast<bool>(f), ErrorCode::InvalidArgument, "write to '" + c.out_path + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, c.out_path, ec);
    require(!ec, ErrorCode::InvalidArgument, "cannot move output into '" + c.out_path + "'");
}

void do_count(const Common& c, const std::string& avoid, std::ostream& out) {
    check_format(c.format);
    const std::uint64_t x = resolve_x(c);
    const auto inst = make_instance(c.instance, x);
    auto spec = SubsetSpec::parse(c.subset);
    if (!avoid.empty()) spec = spec.avoiding(resolve_primes(inst, avoid));
    const CountReport r = count_report(inst, x, spec, c.shards);
    Json doc = base_json(inst, x, spec);
    if (!spec.avoided.empty()) {
        Json ids = Json::array();
        for (const auto& p : spec.avoided) ids.push_back(p.id.to_string());
        doc["avoided"] = ids;
    }
    doc["count"] = r.count;
    doc["main_term"] = num(r.main_term);
    doc["relative_error"] = num(r.relative_error);
    doc["fitted_error_exponent"] = num(r.fitted_error_exponent);
    doc["theta"] = num(inst.theta());
    doc["shards"] = c.shards;
    doc["formulas"] = Json::array({triple(r.formula_id, static_cast<Real>(r.count), r.main_term)});
    emit(doc, c, out);
}

struct ConstantOptions {
    std::string which;
    std::string s = "2", h = "2", r = "3", tail = "1e-8", alpha = "2", ladder;
};

void do_constants(const Common& c, const ConstantOptions& o, std::ostream& out) {
    check_format(c.format);
    require(!o.which.empty(), ErrorCode::InvalidArgument, "--which is required");
    const auto inst = make_instance(c.instance, 2).widened(UINT64_MAX);
    auto uint_opt = [](const std::string& v, const char* what) {
        const std::uint64_t n = parse_exact_integer(v);
        require(n <= UINT32_MAX, ErrorCode::InvalidArgument, std::string(what) + " is too large");
        return static_cast<std::uint32_t>(n);
    };
    const Real tail = parse_real(o.tail, "--tail");
    require(tail > 0, ErrorCode::InvalidArgument, "--tail must be positive");
    Json doc{{"which", o.which}, {"instance", inst.name()}};
    Json params = Json::object();
    ConstantResult res;
    if (o.which == "zeta_M" || o.which == "zeta") {
        const Real s = parse_real(o.s, "--s");
        params = {{"s", num(s)}, {"tail", num(tail)}};
        res = zeta_M(inst, s, tail, c.shards);
    } else if (o.which == "gamma_h") {
        const auto h = uint_opt(o.h, "--h");
        params = {{"h", h}, {"tail", num(tail)}};
        res = gamma_h(inst, h, tail, c.shards);
    } else if (o.which == "mertens_A") {
        std::vector<std::uint64_t> ladder;
        if (o.ladder.empty()) {
            ladder = default_mertens_ladder(inst);
        } else {
            std::stringstream ss(o.ladder);
            std::string item;
            while (std::getline(ss, item, ',')) ladder.push_back(parse_exact_integer(trim(item)));
        }
        Json lj = Json::array();
        for (auto v : ladder) lj.push_back(v);
        params = {{"ladder", lj}};
        res = mertens_A(inst, ladder);
    } else if (o.which == "c1") {
        const auto h = uint_opt(o.h, "--h");
        params = {{"h", h}, {"tail", num(tail)}};
        res = c1_constant(inst, h, tail, c.shards);
    } else if (o.which == "L_h_r") {
        const auto h = uint_opt(o.h, "--h"), r = uint_opt(o.r, "--r");
        params = {{"h", h}, {"r", r}, {"tail", num(tail)}};
        res = L_h_r(inst, h, r, tail, c.shards);
    } else if (o.which == "d1") {
        const auto h = uint_opt(o.h, "--h");
        params = {{"h", h}, {"tail", num(tail)}};
        res = d1_constant(inst, h, tail, c.shards);
    } else if (o.which == "prime_sum") {
        const Real alpha = parse_real(o.alpha, "--alpha");
        require(!c.x_text.empty(), ErrorCode::InvalidArgument, "prime_sum needs --x");
        const std::uint64_t x = resolve_x(c);
        params = {{"alpha", num(alpha)}, {"x", x}};
        const PrimeSumReport p = prime_sum_report(inst, alpha, x, c.shards);
        doc["params"] = params;
        doc["part"] = p.part;
        doc["partial_sum"] = num(p.partial_sum);
        doc["bound_expression"] = num(p.bound_expression);
        doc["ratio"] = num(p.ratio);
        if (alpha > 1) {
            doc["tail"] = num(p.tail);
            doc["completed_sum"] = num(p.completed_sum);
            doc["summed_to"] = p.summed_to;
        }
        const char* id = p.part == 4 ? "sum 1/N(p) - loglog x" : "sum N(p)^-alpha vs x^(1-alpha)/log x";
        doc["formulas"] = Json::array({triple(id, p.partial_sum, p.bound_expression)});
        emit(doc, c, out);
        return;
    } else {
        fail(ErrorCode::InvalidArgument,
             "--which must be zeta_M, gamma_h, mertens_A, c1, L_h_r, d1 or prime_sum");
    }
    doc["params"] = params;
    const Json values = constant_json(res);
    for (const auto& [k, v] : values.items()) doc[k] = v;
    doc["precision_digits"] = output_digits();
    emit(doc, c, out);
}

Statistic make_statistic(const std::string& stat, const SubsetSpec& spec, std::optional<std::uint32_t> knorm) {
    if (stat.rfind("weights:", 0) == 0) {
        const std::uint32_t k = spec.kind == SubsetSpec::Kind::HFull ? spec.h : 1;
        return {weights_file_parse(stat.substr(8)), knorm.value_or(k)};
    }
    return Statistic::preset(stat, spec, knorm);
}

struct StatOptions {
    std::string stat = "omega";
    std::string knorm;
    std::string rmax = "4";
    std::string cdf_out;
};

void do_ekstat(const Common& c, const StatOptions& o, std::ostream& out) {
    check_format(c.format);
    const std::uint64_t x = resolve_x(c);
    const auto spec = SubsetSpec::parse(c.subset);
    std::optional<std::uint32_t> knorm;
    if (!o.knorm.empty()) knorm = static_cast<std::uint32_t>(parse_exact_integer(o.knorm));
    const Statistic stat = make_statistic(o.stat, spec, knorm);
    stat.normalizer();
    check_theorem_pairing(spec, stat);
    const int rmax = static_cast<int>(std::min<std::uint64_t>(parse_exact_integer(o.rmax), 1000));
    require(rmax <= 8, ErrorCode::Unsupported, "moments beyond r = 8 are not reported");

    const auto inst = make_instance(c.instance, x);
    const ScoreSet set = standardized_scores(inst, x, spec, stat, c.shards);
    const DistributionReport rep = distribution_report(set, rmax);

    Json doc = base_json(inst, x, spec);
    doc["statistic"] = set.statistic;
    doc["k_norm"] = set.k_norm;
    doc["shards"] = c.shards;
    Json moments = Json::array(), density = Json::array(), formulas = Json::array();
    for (const auto& m : rep.moments) {
        moments.push_back({{"r", m.r}, {"empirical", num(m.empirical)}, {"gaussian", num(m.gaussian)},
                           {"abs_diff", num(m.abs_diff)}});
        formulas.push_back(triple("E[Z^" + std::to_string(m.r) + "] -> Gaussian moment", m.empirical, m.gaussian));
    }
    for (const auto& d : rep.density) {
        density.push_back({{"a", num(d.a)}, {"density", num(d.density)}, {"phi", num(d.phi)}});
        formulas.push_back(triple("D(x, a) -> Phi(a), a = " + decimal(d.a, 3), d.density, d.phi));
    }
    doc["report"] = {{"ks_distance", num(rep.ks_distance)},
                     {"n_samples", rep.n_samples},
                     {"excluded_small", rep.excluded_small},
                     {"raw_mean", num(rep.raw_mean)},
                     {"raw_variance", num(rep.raw_variance)},
                     {"score_mean", num(rep.score_mean)},
                     {"score_variance", num(rep.score_variance)},
                     {"moments", moments},
                     {"density", density}};
    doc["formulas"] = formulas;

    if (!o.cdf_out.empty()) {
        std::string csv = "t,empirical_cdf,phi_t\n";
        const int d = output_digits();
        for (const auto& p : empirical_cdf(set.scores))
            csv += decimal(p.t, d) + "," + decimal(p.empirical, d) + "," + decimal(p.phi, d) + "\n";
        write_atomic(o.cdf_out, csv);
    }
    emit(doc, c, out);
}

struct ModelOptions {
    std::string beta, y, rmax = "4", project, sample = "100000";
    std::uint64_t seed = 1;
};

void do_modelcheck(const Common& c, const ModelOptions& o, std::ostream& out) {
    check_format(c.format);
    const std::uint64_t x = resolve_x(c);
    const auto spec = SubsetSpec::parse(c.subset);
    const Real beta = o.beta.empty() ? theorem_beta(spec) : parse_real(o.beta, "--beta");
    const std::uint64_t y = o.y.empty() ? 0 : parse_exact_integer(o.y);
    const std::uint32_t project = o.project.empty() ? 0 : static_cast<std::uint32_t>(parse_exact_integer(o.project));
    const int rmax = static_cast<int>(std::min<std::uint64_t>(parse_exact_integer(o.rmax), 1000));
    require(rmax <= 4, ErrorCode::Unsupported, "model moments are provided for r <= 4");
    const auto inst = make_instance(c.instance, x);

    const ConditionReport cond = condition_check(inst, x, spec, beta, y, project, true, c.shards);
    const ConditionAAudit audit =
        condition_a_audit(inst, x, spec, beta, parse_exact_integer(o.sample), o.seed, project);
    const auto moments = model_vs_truncated(inst, x, spec, cond.y_at_x, rmax, project, c.shards);

    Json doc = base_json(inst, x, spec);
    doc["beta"] = num(beta);
    doc["project"] = project;
    doc["sqrt_x"] = cond.sqrt_x;
    doc["y_at_x"] = cond.y_at_x;
    doc["y_at_sqrt_x"] = cond.y_at_sqrt_x;
    doc["shards"] = c.shards;
    Json rows = Json::array(), mrows = Json::array(), formulas = Json::array();
    for (const auto& r : cond.rows) {
        rows.push_back({{"name", r.name},
                        {"value_at_sqrt_x", num(r.value_at_sqrt_x)},
                        {"value_at_x", num(r.value_at_x)},
                        {"normalizer_at_sqrt_x", num(r.normalizer_at_sqrt_x)},
                        {"normalizer", num(r.normalizer)},
                        {"ratio_at_sqrt_x", num(r.ratio_at_sqrt_x)},
                        {"ratio_at_x", num(r.ratio_at_x)},
                        {"pass", r.pass}});
    }
    for (const auto& m : moments) {
        mrows.push_back({{"r", m.r}, {"empirical", num(m.empirical)}, {"model", num(m.model)},
                         {"abs_diff", num(m.abs_diff)}});
        formulas.push_back(triple("r-th normalized moment of omega_y = that of S_y", m.empirical, m.model));
    }
    doc["conditions"] = rows;
    doc["condition_a"] = {{"sampled", audit.sampled},
                          {"seed", o.seed},
                          {"max_large_primes", audit.max_large_primes},
                          {"bound", audit.bound},
                          {"pass", audit.pass}};
    doc["note"] = cond.note;
    doc["moments"] = mrows;
    doc["formulas"] = formulas;
    emit(doc, c, out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Elements, counts, constants and Erdos-Kac statistics of abelian monoids", "ekmonoid"};
    app.require_subcommand(1);
    // -h is taken by --h (the h of h-free / h-full).
    app.set_help_flag("--help", "Print this help message and exit");

    Common c;
    std::string avoid;
    ConstantOptions co;
    StatOptions so;
    ModelOptions mo;

    auto add_common = [&](CLI::App* sub, bool needs_x) {
        sub->add_option("--instance", c.instance, "integers, gaussian, fq:q=<q>, p1:q=<q> or custom:file=..");
        auto* xo = sub->add_option("--x", c.x_text, "Norm bound (exact integer, 1e7 style accepted)");
        if (needs_x) xo->required();
        sub->add_option("--subset", c.subset, "all, hfree:<h> or hfull:<h>");
        sub->add_option("--format", c.format, "json, tsv or csv");
        sub->add_option("--out", c.out_path, "Write the report here instead of stdout");
        sub->add_option("--shards", c.shards, "Worker threads")->check(CLI::PositiveNumber);
    };

    auto* en = app.add_subcommand("enumerate", "List subset elements as norm<TAB>factorization");
    add_common(en, true);

    auto* ct = app.add_subcommand("count", "Count subset elements and compare with the main term");
    add_common(ct, true);
    ct->add_option("--avoid", avoid, "Comma-separated prime ids the elements must avoid");

    auto* cs = app.add_subcommand("constants", "Euler products and prime sums");
    add_common(cs, false);
    cs->add_option("--which", co.which, "zeta_M, gamma_h, mertens_A, c1, L_h_r, d1, prime_sum")->required();
    cs->add_option("--s", co.s);
    cs->add_option("--h", co.h);
    cs->add_option("--r", co.r);
    cs->add_option("--tail", co.tail, "Target tail bound");
    cs->add_option("--alpha", co.alpha);
    cs->add_option("--ladder", co.ladder, "Comma-separated x values for mertens_A");

    auto* ek = app.add_subcommand("ekstat", "Standardized score distribution against the Gaussian");
    add_common(ek, true);
    ek->add_option("--stat", so.stat, "omega, bigomega, logd, omegaT, omega_k:<k> or weights:<file>");
    ek->add_option("--knorm", so.knorm, "Normalizer index k of a_k");
    ek->add_option("--rmax", so.rmax);
    ek->add_option("--cdf-out", so.cdf_out, "CSV of the empirical CDF");

    auto* mc = app.add_subcommand("modelcheck", "Bernoulli model conditions and moment comparison");
    add_common(mc, true);
    mc->add_option("--beta", mo.beta);
    mc->add_option("--y", mo.y);
    mc->add_option("--rmax", mo.rmax);
    mc->add_option("--project", mo.project, "Count primes of exponent exactly k (0: any)");
    mc->add_option("--sample", mo.sample, "Sample size of the condition (a) audit");
    mc->add_option("--seed", mo.seed);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        err << "error: " << error_code_name(ErrorCode::InvalidArgument) << ": " << msg << "\n";
        return kInvalidConfig;
    }

    try {
        if (*en) {
            if (en->count("--format") == 0) c.format = "tsv";
            do_enumerate(c, out);
        } else if (*ct) {
            do_count(c, avoid, out);
        } else if (*cs) {
            do_constants(c, co, out);
        } else if (*ek) {
            do_ekstat(c, so, out);
        } else if (*mc) {
            do_modelcheck(c, mo, out);
        }
    } catch (const Error& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        err << "error: " << error_code_name(e.code()) << ": " << msg << "\n";
        return exit_status(e.code());
    } catch (const std::exception& e) {
        err << "error: " << error_code_name(ErrorCode::NumericFailure) << ": " << e.what() << "\n";
        return kNumeric;
    }
    return kOk;
}

}  // namespace ekmonoid::cli
