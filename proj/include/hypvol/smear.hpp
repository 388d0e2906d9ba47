#pragma once

// Monte-Carlo smearing of the regular simplex over hyperbolic surfaces.
//
// Surfaces are H^2 / Gamma for a Fuchsian group given by side pairings of a
// Dirichlet domain D centred at a base point o. Points are reduced to D by
// greedy descent of d(., o); cells of the net are the Gamma-equivariant
// Voronoi cells of the orbit of a finite set of centres in D.
//
// In boundary mode the surface M is the convex core of a funnelled surface:
// the model lists the boundary lifts meeting D, and the Haar sampler covers
// M together with a funnel collar of prescribed depth.

#include "hypvol/hypgeom.hpp"
#include "hypvol/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace hypvol::smear {

using V3 = Eigen::Vector3d;
using M3 = Eigen::Matrix3d;
using Word = std::vector<std::uint8_t>;

double mink(const V3& x, const V3& y);
/// Hyperbolic distance between points of the hyperboloid (no validation).
double dist(const V3& x, const V3& y);
V3 renormalize(const V3& x);
M3 lorentz_inverse(const M3& m);
M3 translation_x(double d);
M3 rotation(double angle);
/// Orientation-preserving boost taking the origin to p.
M3 boost_to(const V3& p);
V3 origin();
/// Spacelike unit normal of the geodesic through a and b.
V3 geodesic_normal(const V3& a, const V3& b);

struct SurfaceModel {
    std::string name;
    std::vector<M3> generators;
    V3 base = V3(1.0, 0.0, 0.0);
    std::vector<V3> polygon;
    /// Unit normals n of the boundary lifts meeting D, with <base, n> > 0.
    std::vector<V3> boundary;
    int chi = 0;

    // derived by finalize()
    std::vector<int> inverse;
    /// Dirichlet walls: x in D iff <x, walls[k]> <= 0 for every k.
    std::vector<V3> walls;
    /// generators[k] * base.
    std::vector<V3> base_images;
    /// Side normals of the polygon, interior side >= 0.
    std::vector<V3> sides;
    double exact_area = 0.0;
    double boundary_length = 0.0;
    /// Largest distance from base to a polygon vertex.
    double polygon_radius = 0.0;
    /// Translates of the boundary lifts near D (for distances to the boundary).
    std::vector<V3> lift_normals;

    bool closed() const { return boundary.empty(); }
    Frame base_frame() const;
};

/// Computes derived data and validates the model; throws Error naming the
/// violated invariant.
SurfaceModel finalize(SurfaceModel m);

SurfaceModel load_model(const std::string& path);
SurfaceModel model_from_json_text(const std::string& text);
std::string model_to_json_text(const SurfaceModel& m);

/// Closed genus-2 surface: regular octagon with angles pi/4, opposite sides paired.
SurfaceModel genus2_model();

/// One-holed torus with geodesic boundary of the given length: Schottky group
/// generated by equal translations along two perpendicular axes.
SurfaceModel one_holed_torus_model(double boundary_length = 2.0);

/// Area of the polygon by fan triangulation from its first vertex.
double polygon_area(const SurfaceModel& m);

bool in_domain(const V3& x, const SurfaceModel& m, double tol = 1e-12);
bool in_polygon(const V3& x, const SurfaceModel& m, double tol = 0.0);

struct Reduction {
    V3 point;
    /// gamma * point == input.
    M3 gamma;
    Word word;  // gamma = g[word[0]] * g[word[1]] * ...
    int steps = 0;
};

Reduction reduce_to_domain(const V3& x, const SurfaceModel& m, int max_steps = 400);

M3 word_matrix(const SurfaceModel& m, const Word& w);

/// Freely reduced words (no g followed by its listed inverse) of length at
/// most max_len, ordered by length and then lexicographically.
std::vector<Word> reduced_words(const SurfaceModel& m, int max_len);

/// word_matrix(m, w) * x evaluated letter by letter from the right with
/// renormalization; avoids the cancellation in long matrix products.
V3 apply_word(const SurfaceModel& m, const Word& w, const V3& x);

/// Inverse word (reversed, letters replaced by their listed inverses).
Word inverse_word(const SurfaceModel& m, const Word& w);

/// Concatenation a b with free cancellation at the junction.
Word concat_words(const SurfaceModel& m, const Word& a, const Word& b);

/// Signed distance from a point of D to the boundary: positive inside the
/// core, negative beyond a lift (then *which receives the index of that lift
/// in m.boundary). Closed models return +infinity.
double boundary_signed_distance(const V3& x_in_D, const SurfaceModel& m, int* which = nullptr);

// ------------------------------------------------------------------ Haar

struct FrameSample {
    V3 point;
    double theta = 0.0;
};

/// T_p composed with the rotation by theta about the origin.
M3 frame_matrix(const FrameSample& s);
Frame to_frame(const FrameSample& s);

inline constexpr std::uint64_t kShardSize = 1u << 16;

/// Uniform sampler of Gamma \ G restricted to {g : g(o) in region}; region is
/// D (closed mode) or the core plus a funnel collar of the given depth.
class HaarSampler {
public:
    HaarSampler(const SurfaceModel& m, std::uint64_t seed, double funnel_depth = 0.0);

    FrameSample next();
    /// Hyperbolic area of the sampled region.
    double region_area() const { return core_area_ + funnel_area_; }
    double acceptance() const;

private:
    const SurfaceModel* m_;
    Rng rng_;
    double funnel_depth_;
    double core_area_;
    double funnel_area_;
    double cosh_rmax_;
    long proposals_ = 0;
    long accepted_ = 0;
    V3 foot_;
    V3 along_;
};

double funnel_area(const SurfaceModel& m, double depth);

/// N frames in shard order: shard s uses seed derive_seed(seed, s).
std::vector<FrameSample> haar_sample(const SurfaceModel& m, std::uint64_t n, std::uint64_t seed,
                                     double funnel_depth = 0.0);

// ------------------------------------------------------------------- net

struct GammaNet {
    std::vector<V3> centers;
    double covering_radius = 0.0;
    double target_radius = 0.0;
    bool mirrored = false;
    /// Funnel depth up to which the net covers (boundary mode).
    double reach = 0.0;
};

struct NetOptions {
    std::uint64_t seed = kDefaultSeed;
    int training_samples = 20000;
    int validation_samples = 20000;
    /// Boundary mode: depth of the mirrored band and spacing of the rows.
    double band = 0.6;
    double row_spacing = 0.4;
};

GammaNet build_net(const SurfaceModel& m, double target_radius = 0.45, double reach = 0.0,
                   const NetOptions& opts = {});

/// Nearest Gamma-translate of a net centre.
class CellLocator {
public:
    CellLocator(const SurfaceModel& m, const GammaNet& net);

    struct Hit {
        int center = -1;
        /// Group element h: the cell centre is h * centers[center].
        M3 element;
        V3 position;
        double distance = 0.0;
        /// Index of the translate; its word is translate_word(translate).
        int translate = -1;
    };

    /// x must lie in D (see reduce_to_domain).
    Hit locate_in_domain(const V3& x) const;
    Hit locate(const V3& x) const;

    /// Net centres with the signed boundary distance and the lift index
    /// (-1 for interior centres).
    double center_depth(int c) const { return center_dist_[static_cast<std::size_t>(c)]; }
    int center_lift(int c) const { return center_lift_[static_cast<std::size_t>(c)]; }
    const Word& translate_word(int t) const { return translates_[static_cast<std::size_t>(t)].word; }
    const SurfaceModel& model() const { return *m_; }
    const GammaNet& net() const { return *net_; }

private:
    struct Translate {
        int center;
        M3 element;
        V3 point;
        Word word;
    };
    struct Bin {
        std::vector<int> candidates;
    };

    const SurfaceModel* m_;
    const GammaNet* net_;
    std::vector<Translate> translates_;
    std::vector<double> center_dist_;
    std::vector<int> center_lift_;
    M3 to_base_;
    double keep_radius_ = 1.0;
    mutable std::unordered_map<std::int64_t, Bin> coarse_;
    mutable std::unordered_map<std::int64_t, Bin> fine_;

    const Bin& bin_for(const V3& x) const;
    Hit make_hit(int t, double cosh_d) const;
    Hit brute_force(const V3& x) const;
};

// ----------------------------------------------------------------- chain

/// Canonical key: centre indices and descent words of the vertices after
/// translating the first vertex to its centre in D.
struct SimplexKey {
    std::string bytes;

    struct Decoded {
        std::vector<int> centers;
        std::vector<Word> words;  // words[0] is empty
    };
    Decoded decode() const;
    static SimplexKey encode(const Decoded& d);
    bool operator<(const SimplexKey& o) const { return bytes < o.bytes; }
    bool operator==(const SimplexKey& o) const { return bytes == o.bytes; }
};

enum class ClassTag : std::uint8_t { interior = 0, exterior = 1 };

struct ChainEntry {
    std::uint64_t b_plus = 0;
    std::uint64_t b_minus = 0;
    ClassTag tag = ClassTag::interior;
};

struct SmearChain {
    std::vector<std::pair<SimplexKey, ChainEntry>> entries;  // sorted by key
    std::uint64_t samples = 0;
    double scale = 0.0;
    double L = 0.0;
    std::uint64_t seed = 0;
    double region_area = 0.0;
    bool boundary_mode = false;
    std::uint64_t discarded_plus = 0;
    std::uint64_t discarded_minus = 0;
    double max_edge = 0.0;

    double coefficient(const ChainEntry& e) const {
        return scale * (static_cast<double>(e.b_plus) - static_cast<double>(e.b_minus)) / 2.0;
    }
};

struct AccumulateOptions {
    std::uint64_t shard_size = kShardSize;
    int threads = 1;
};

/// Vertices of the chain simplex realized on net centres.
std::vector<V3> realize(const SimplexKey& key, const SurfaceModel& m, const GammaNet& net);

SmearChain accumulate_chain(const SurfaceModel& m, const GammaNet& net, double L, std::uint64_t n,
                            std::uint64_t seed, const AccumulateOptions& opts = {});

struct FaceResidual {
    SimplexKey face;
    double residual = 0.0;
    double z_score = 0.0;
    double expected_count = 0.0;
};

std::vector<FaceResidual> boundary_residuals(const SmearChain& chain, const SurfaceModel& m,
                                             const GammaNet& net);

struct RatioReport {
    double omega = 0.0;
    double l1_norm = 0.0;
    double ratio = 0.0;
    double implied_norm_upper = 0.0;
    double mc_sigma = 0.0;
    double ext_l1 = 0.0;
    double ext_mass = 0.0;
};

/// Exact signed areas by default; quadrature = true integrates each simplex.
RatioReport ratio_report(const SmearChain& chain, const SurfaceModel& m, const GammaNet& net,
                         bool quadrature = false);

struct InclusionResult {
    std::uint64_t samples = 0;
    /// g(q_0) deep inside the core but simplex not in W_int.
    std::uint64_t violations_inner = 0;
    /// simplex in W but g(q_0) outside N_L(M).
    std::uint64_t violations_outer = 0;
    std::uint64_t deep_samples = 0;
    std::uint64_t retained_samples = 0;
    std::uint64_t violations() const { return violations_inner + violations_outer; }
};

InclusionResult inclusion_check(const SurfaceModel& m, const GammaNet& net, double L,
                                std::uint64_t n, std::uint64_t seed,
                                const AccumulateOptions& opts = {});

/// Depth of the funnel collar sampled for edgelength L: L + circumradius + 1.
/// Frames whose simplex can meet the core have g(o) no deeper than L +
/// circumradius, so the collar contains all of them.
double sampling_depth(double L);

/// Bounds for the sampled plus-mass: [area minus tube around the boundary at
/// depth L + 3, area plus tube at depth L], tubes from tube_factor.
struct MassBrackets {
    double lower = 0.0;
    double upper = 0.0;
};
MassBrackets mass_brackets(const SurfaceModel& m, double L);

}  // namespace hypvol::smear
