#include "hypvol/report.hpp"

#include <gsl/gsl_cdf.h>
#include <gsl/gsl_randist.h>

#include <cmath>
#include <map>
#include <numbers>

namespace hypvol {

using smear::ClassTag;

SandwichCheck sandwich_check(const smear::SmearChain& chain, const smear::SurfaceModel& m) {
    SandwichCheck s;
    double plus = 0.0;
    double minus = 0.0;
    for (const auto& [key, e] : chain.entries) {
        plus += static_cast<double>(e.b_plus);
        minus += static_cast<double>(e.b_minus);
    }
    const double n = static_cast<double>(chain.samples);
    s.plus_mass = chain.scale * plus;
    s.minus_mass = chain.scale * minus;
    // binomial standard deviation of a retained fraction
    const auto sigma = [&](double count) {
        const double p = count / n;
        return chain.scale * std::sqrt(n * p * (1.0 - p));
    };
    s.sigma_plus = sigma(plus);
    s.sigma_minus = sigma(minus);
    s.brackets = smear::mass_brackets(m, chain.L);
    const auto inside = [&](double mass, double sd) {
        return mass >= s.brackets.lower - 3.0 * sd && mass <= s.brackets.upper + 3.0 * sd;
    };
    s.ok = inside(s.plus_mass, s.sigma_plus) && inside(s.minus_mass, s.sigma_minus);
    return s;
}

double discrete_exceedance_probability(double expected_count, double z_limit) {
    if (!(expected_count > 0.0)) {
        return 0.0;
    }
    // S = X - Y with X, Y ~ Poisson(mu/2); |z| > z_limit means |S| >= k
    const double lam = expected_count / 2.0;
    const auto k = static_cast<unsigned>(std::floor(z_limit * std::sqrt(expected_count))) + 1U;
    const double spread = 12.0 * std::sqrt(lam) + 20.0;
    const auto y_hi = static_cast<unsigned>(lam + spread);
    double upper = 0.0;
    for (unsigned y = 0; y <= y_hi; ++y) {
        upper += gsl_ran_poisson_pdf(y, lam) * gsl_cdf_poisson_Q(k + y - 1U, lam);
    }
    return 2.0 * upper;
}

ResidualSummary summarize_residuals(const std::vector<smear::FaceResidual>& r) {
    ResidualSummary s;
    s.faces = r.size();
    double sum = 0.0;
    double sum2 = 0.0;
    std::map<double, double> tail;
    for (const smear::FaceResidual& f : r) {
        if (f.expected_count < kResidualMinCount) {
            continue;
        }
        ++s.tested;
        const double a = std::abs(f.z_score);
        s.max_abs_z = std::max(s.max_abs_z, a);
        s.exceedances += a > kResidualMaxZ ? 1 : 0;
        sum += f.z_score;
        sum2 += f.z_score * f.z_score;
        ++s.histogram[static_cast<std::size_t>(std::min(4.0, std::floor(a)))];
        auto [it, fresh] = tail.try_emplace(f.expected_count, 0.0);
        if (fresh) {
            it->second = discrete_exceedance_probability(f.expected_count, kResidualMaxZ);
        }
        s.discrete_expected_exceedances += it->second;
    }
    if (s.tested > 0) {
        const double t = static_cast<double>(s.tested);
        s.z_mean = sum / t;
        s.z_variance = sum2 / t - s.z_mean * s.z_mean;
    }
    s.gaussian_expected_exceedances =
        static_cast<double>(s.tested) * std::erfc(kResidualMaxZ / std::numbers::sqrt2);
    s.ok = s.exceedances == 0;
    return s;
}

SmearRun run_smear(const smear::SurfaceModel& m, const SmearRunConfig& cfg) {
    SmearRun run;
    run.model = m;
    smear::NetOptions no;
    no.seed = derive_seed(cfg.seed, 0x6e6574);
    run.net = smear::build_net(run.model, cfg.target_radius, m.closed() ? 0.0 : cfg.L + 1.0, no);
    run.chain = smear::accumulate_chain(run.model, run.net, cfg.L, cfg.samples, cfg.seed);
    run.residuals = smear::boundary_residuals(run.chain, run.model, run.net);
    run.residual_summary = summarize_residuals(run.residuals);
    run.sandwich = sandwich_check(run.chain, run.model);
    run.ratio = smear::ratio_report(run.chain, run.model, run.net);
    VLOptions vo;
    vo.restarts = cfg.vl_restarts;
    vo.seed = cfg.seed;
    run.vl_reference = vl_estimate(2, cfg.L, vo).value;
    run.ratio_ok = run.ratio.ratio >= run.vl_reference - kRatioLowerMargin &&
                   run.ratio.ratio <= std::numbers::pi + kRatioUpperMargin;
    return run;
}

namespace {

io::Json num(double x) { return std::isfinite(x) ? io::Json(io::round_sig(x)) : io::Json(nullptr); }

}  // namespace

io::Json to_json(const SmearRun& run, const SmearRunConfig& cfg) {
    io::Json j;
    j["seed"] = cfg.seed;
    j["model"] = run.model.name;
    j["mode"] = run.model.closed() ? "closed" : "boundary";
    j["L"] = num(cfg.L);
    j["samples"] = cfg.samples;
    j["exact_area"] = num(run.model.exact_area);
    j["boundary_length"] = num(run.model.boundary_length);

    io::Json net;
    net["centers"] = run.net.centers.size();
    net["target_radius"] = num(run.net.target_radius);
    net["covering_radius"] = num(run.net.covering_radius);
    net["mirrored"] = run.net.mirrored;
    net["reach"] = num(run.net.reach);
    j["net"] = net;

    const smear::SmearChain& c = run.chain;
    std::size_t n_int = 0;
    for (const auto& [k, e] : c.entries) {
        n_int += e.tag == ClassTag::interior ? 1 : 0;
    }
    io::Json chain;
    chain["entries"] = c.entries.size();
    chain["interior_entries"] = n_int;
    chain["exterior_entries"] = c.entries.size() - n_int;
    chain["scale"] = num(c.scale);
    chain["region_area"] = num(c.region_area);
    chain["discarded_plus"] = c.discarded_plus;
    chain["discarded_minus"] = c.discarded_minus;
    chain["max_edge"] = num(c.max_edge);
    j["chain"] = chain;

    const SandwichCheck& s = run.sandwich;
    io::Json sw;
    sw["plus_mass"] = num(s.plus_mass);
    sw["minus_mass"] = num(s.minus_mass);
    sw["sigma_plus"] = num(s.sigma_plus);
    sw["sigma_minus"] = num(s.sigma_minus);
    sw["lower"] = num(s.brackets.lower);
    sw["upper"] = num(s.brackets.upper);
    j["sandwich"] = sw;

    const ResidualSummary& r = run.residual_summary;
    io::Json res;
    res["faces"] = r.faces;
    res["min_expected_count"] = num(kResidualMinCount);
    res["tested"] = r.tested;
    res["max_abs_z"] = num(r.max_abs_z);
    res["z_limit"] = num(kResidualMaxZ);
    res["exceedances"] = r.exceedances;
    res["gaussian_expected_exceedances"] = num(r.gaussian_expected_exceedances);
    res["discrete_expected_exceedances"] = num(r.discrete_expected_exceedances);
    res["z_mean"] = num(r.z_mean);
    res["z_variance"] = num(r.z_variance);
    res["z_histogram"] = {{"0-1", r.histogram[0]}, {"1-2", r.histogram[1]}, {"2-3", r.histogram[2]},
                          {"3-4", r.histogram[3]}, {"4+", r.histogram[4]}};
    j["residuals"] = res;

    const smear::RatioReport& q = run.ratio;
    io::Json ratio;
    ratio["omega"] = num(q.omega);
    ratio["l1_norm"] = num(q.l1_norm);
    ratio["ratio"] = num(q.ratio);
    ratio["implied_norm_upper"] = num(q.implied_norm_upper);
    ratio["mc_sigma"] = num(q.mc_sigma);
    ratio["ext_l1"] = num(q.ext_l1);
    ratio["ext_mass"] = num(q.ext_mass);
    ratio["vl_reference"] = num(run.vl_reference);
    j["ratio"] = ratio;

    io::Json checks;
    checks["sandwich"] = s.ok;
    checks["residuals"] = r.ok;
    checks["ratio"] = run.ratio_ok;
    checks["all"] = run.passed();
    j["checks"] = checks;
    return j;
}

io::Json to_json(const smear::InclusionResult& r) {
    io::Json j;
    j["samples"] = r.samples;
    j["deep_samples"] = r.deep_samples;
    j["retained_samples"] = r.retained_samples;
    j["violations_inner"] = r.violations_inner;
    j["violations_outer"] = r.violations_outer;
    j["violations"] = r.violations();
    return j;
}

io::CsvTable simplex_table(const SmearRun& run) {
    io::CsvTable t({"key", "c0", "c1", "c2", "b_plus", "b_minus", "coefficient", "tag", "signed_area"});
    static const char* hex = "0123456789abcdef";
    for (const auto& [key, e] : run.chain.entries) {
        std::string h;
        for (char ch : key.bytes) {
            const auto b = static_cast<unsigned char>(ch);
            h += hex[b >> 4];
            h += hex[b & 15];
        }
        const smear::SimplexKey::Decoded d = key.decode();
        const std::vector<smear::V3> p = smear::realize(key, run.model, run.net);
        t.add_text_row({h, std::to_string(d.centers[0]), std::to_string(d.centers[1]),
                        std::to_string(d.centers[2]), std::to_string(e.b_plus), std::to_string(e.b_minus),
                        io::format_number(run.chain.coefficient(e)),
                        e.tag == ClassTag::interior ? "int" : "ext",
                        io::format_number(signed_triangle_area(p[0], p[1], p[2]))});
    }
    return t;
}

}  // namespace hypvol
