#pragma once

// One smearing experiment end to end (net, chain, residuals, ratio,
// sandwich) and its summary document with the embedded pass/fail checks.

#include "hypvol/io.hpp"

#include <array>

namespace hypvol {

struct SmearRunConfig {
    double L = 6.0;
    std::uint64_t samples = 1000000;
    std::uint64_t seed = kDefaultSeed;
    double target_radius = 0.45;
    /// Restarts of the V_L reference used by the ratio check.
    int vl_restarts = 8;
};

struct SandwichCheck {
    double plus_mass = 0.0;
    double minus_mass = 0.0;
    double sigma_plus = 0.0;
    double sigma_minus = 0.0;
    smear::MassBrackets brackets;
    bool ok = false;
};

struct ResidualSummary {
    std::size_t faces = 0;
    std::size_t tested = 0;
    double max_abs_z = 0.0;
    std::size_t exceedances = 0;
    /// tested * P(|Z| > 4) for a standard normal Z.
    double gaussian_expected_exceedances = 0.0;
    /// Same count under the exact law of the signed count, a difference of
    /// two Poisson variables with equal means summing to the face count.
    double discrete_expected_exceedances = 0.0;
    double z_mean = 0.0;
    double z_variance = 0.0;
    /// |z| in [0,1), [1,2), [2,3), [3,4), [4, inf) over tested faces.
    std::array<std::size_t, 5> histogram{};
    bool ok = false;
};

struct SmearRun {
    smear::SurfaceModel model;
    smear::GammaNet net;
    smear::SmearChain chain;
    std::vector<smear::FaceResidual> residuals;
    smear::RatioReport ratio;
    SandwichCheck sandwich;
    ResidualSummary residual_summary;
    double vl_reference = 0.0;
    bool ratio_ok = false;

    bool passed() const { return sandwich.ok && residual_summary.ok && ratio_ok; }
};

inline constexpr double kResidualMinCount = 30.0;
inline constexpr double kResidualMaxZ = 4.0;
/// The ratio check accepts omega/l1 in [V_L - 0.15, pi + 0.05].
inline constexpr double kRatioLowerMargin = 0.15;
inline constexpr double kRatioUpperMargin = 0.05;

SandwichCheck sandwich_check(const smear::SmearChain& chain, const smear::SurfaceModel& m);
/// P(|X - Y| > z_limit * sqrt(mu)) for independent X, Y ~ Poisson(mu / 2).
double discrete_exceedance_probability(double expected_count, double z_limit);
ResidualSummary summarize_residuals(const std::vector<smear::FaceResidual>& r);

SmearRun run_smear(const smear::SurfaceModel& m, const SmearRunConfig& cfg);

io::Json to_json(const SmearRun& run, const SmearRunConfig& cfg);
io::Json to_json(const smear::InclusionResult& r);

/// Per-simplex table: key (hex), centres, counts, coefficient, tag, signed area.
io::CsvTable simplex_table(const SmearRun& run);

}  // namespace hypvol
