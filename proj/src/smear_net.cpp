#include "hypvol/smear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace hypvol::smear {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Foot of the perpendicular from the base point to a lift and the unit
// tangent along the lift there; Fermi coordinates (s, t) with t > 0 on the
// funnel side map to cosh t (cosh s foot + sinh s along) - sinh t n.
struct LiftFrame {
    V3 foot;
    V3 along;
    V3 normal;

    V3 point(double s, double t) const {
        return std::cosh(t) * (std::cosh(s) * foot + std::sinh(s) * along) - std::sinh(t) * normal;
    }
};

LiftFrame lift_frame(const SurfaceModel& m, const V3& n) {
    LiftFrame f;
    f.normal = n;
    f.foot = renormalize(m.base - mink(m.base, n) * n);
    const V3 j(-1.0, 1.0, 1.0);
    V3 u = j.cwiseProduct(f.foot.cross(n));
    f.along = u / std::sqrt(mink(u, u));
    return f;
}

}  // namespace

// ------------------------------------------------------------------ Haar

M3 frame_matrix(const FrameSample& s) { return boost_to(s.point) * rotation(s.theta); }

Frame to_frame(const FrameSample& s) {
    const M3 g = frame_matrix(s);
    Frame f{HPoint::from_coords(Vec(g.col(0))), {}};
    f.tangent = {Vec(g.col(1)), Vec(g.col(2))};
    return f;
}

double funnel_area(const SurfaceModel& m, double depth) {
    if (m.closed() || depth <= 0.0) {
        return 0.0;
    }
    return m.boundary_length * std::sinh(depth);
}

HaarSampler::HaarSampler(const SurfaceModel& m, std::uint64_t seed, double funnel_depth)
    : m_(&m),
      rng_(seed),
      funnel_depth_(m.closed() ? 0.0 : std::max(0.0, funnel_depth)),
      core_area_(m.exact_area),
      funnel_area_(funnel_area(m, funnel_depth_)),
      cosh_rmax_(std::cosh(m.polygon_radius * (1.0 + 1e-12))) {
    if (funnel_area_ > 0.0) {
        const LiftFrame f = lift_frame(m, m.boundary.front());
        foot_ = f.foot;
        along_ = f.along;
    }
}

double HaarSampler::acceptance() const {
    return proposals_ == 0 ? 1.0 : static_cast<double>(accepted_) / static_cast<double>(proposals_);
}

FrameSample HaarSampler::next() {
    FrameSample out;
    const double pick = uniform01(rng_) * region_area();
    if (pick < funnel_area_) {
        const double s = uniform01(rng_) * m_->boundary_length;
        const double t = std::asinh(uniform01(rng_) * std::sinh(funnel_depth_));
        const LiftFrame f{foot_, along_, m_->boundary.front()};
        out.point = renormalize(f.point(s, t));
    } else {
        // polar rejection in the smallest base-centred disk containing the
        // polygon: cosh r uniform gives the hyperbolic area element
        const M3 b = boost_to(m_->base);
        for (;;) {
            const double c = 1.0 + uniform01(rng_) * (cosh_rmax_ - 1.0);
            const double sh = std::sqrt(std::max(0.0, c * c - 1.0));
            const double phi = kTwoPi * uniform01(rng_);
            const V3 x = renormalize(b * V3(c, sh * std::cos(phi), sh * std::sin(phi)));
            ++proposals_;
            if (in_polygon(x, *m_)) {
                ++accepted_;
                out.point = x;
                break;
            }
            if (proposals_ >= 4096 && acceptance() < 1e-3) {
                throw Error("haar_sample: rejection efficiency below 1e-3");
            }
        }
    }
    out.theta = kTwoPi * uniform01(rng_);
    return out;
}

std::vector<FrameSample> haar_sample(const SurfaceModel& m, std::uint64_t n, std::uint64_t seed,
                                     double funnel_depth) {
    std::vector<FrameSample> out;
    out.reserve(static_cast<std::size_t>(n));
    for (std::uint64_t shard = 0; out.size() < n; ++shard) {
        HaarSampler h(m, derive_seed(seed, shard), funnel_depth);
        const std::uint64_t count = std::min<std::uint64_t>(kShardSize, n - out.size());
        for (std::uint64_t i = 0; i < count; ++i) {
            out.push_back(h.next());
        }
    }
    return out;
}

// --------------------------------------------------------------- locator

namespace {

constexpr int kTranslateWordLength = 5;
constexpr double kRing = 0.25;
constexpr double kCoarseRing = 1.0;

struct Polar {
    double r;
    double phi;
};

Polar polar_of(const M3& to_base, const V3& x) {
    const V3 y = to_base * x;
    const double r = y[0] <= 1.0 ? 0.0 : std::acosh(y[0]);
    double phi = std::atan2(y[2], y[1]);
    if (phi < 0.0) {
        phi += kTwoPi;
    }
    return {r, phi};
}

// Polar bin of ring width w: index, centre and a radius containing the bin.
struct BinGeometry {
    std::int64_t key;
    double r_mid;
    double phi_mid;
    double half_diag;
};

BinGeometry bin_geometry(const Polar& p, double w) {
    const auto ring = static_cast<std::int64_t>(std::floor(p.r / w));
    const double r_out = static_cast<double>(ring + 1) * w;
    const double sectors = std::max(1.0, std::ceil(kTwoPi * std::sinh(r_out) / w));
    auto sector = static_cast<std::int64_t>(std::floor(p.phi / kTwoPi * sectors));
    sector = std::clamp<std::int64_t>(sector, 0, static_cast<std::int64_t>(sectors) - 1);
    BinGeometry g;
    g.key = (ring << 32) | sector;
    g.r_mid = (static_cast<double>(ring) + 0.5) * w;
    g.phi_mid = (static_cast<double>(sector) + 0.5) * kTwoPi / sectors;
    // radial half-width plus half the sector arc at the outer radius
    g.half_diag = 0.5 * w + 0.5 * kTwoPi * std::sinh(r_out) / sectors;
    return g;
}

V3 polar_point(const M3& from_base, double r, double phi) {
    return renormalize(from_base *
                       V3(std::cosh(r), std::sinh(r) * std::cos(phi), std::sinh(r) * std::sin(phi)));
}

}  // namespace

CellLocator::CellLocator(const SurfaceModel& m, const GammaNet& net) : m_(&m), net_(&net) {
    if (net.centers.empty()) {
        throw Error("CellLocator: net has no centres");
    }
    to_base_ = lorentz_inverse(boost_to(m.base));
    keep_radius_ = std::max(1.0, 2.0 * net.covering_radius + 0.1);
    const double keep_sinh = std::sinh(keep_radius_);
    const std::vector<Word> words = reduced_words(m, kTranslateWordLength);
    std::vector<M3> mats;
    mats.reserve(words.size());
    for (const Word& w : words) {
        mats.push_back(word_matrix(m, w));
    }
    for (std::size_t c = 0; c < net.centers.size(); ++c) {
        const std::size_t first = translates_.size();
        for (std::size_t k = 0; k < words.size(); ++k) {
            const V3 p = renormalize(mats[k] * net.centers[c]);
            const bool near = std::all_of(m.walls.begin(), m.walls.end(),
                                          [&](const V3& w) { return mink(p, w) <= keep_sinh; });
            if (!near) {
                continue;
            }
            const bool dup = std::any_of(translates_.begin() + static_cast<std::ptrdiff_t>(first),
                                         translates_.end(), [&](const Translate& t) {
                                             return -mink(t.point, p) - 1.0 <= 1e-18 + 1e-12 * p[0];
                                         });
            if (!dup) {
                translates_.push_back({static_cast<int>(c), mats[k], p, words[k]});
            }
        }
        double which_d = 0.0;
        int which = -1;
        which_d = boundary_signed_distance(net.centers[c], m, &which);
        center_dist_.push_back(which_d);
        center_lift_.push_back(which_d < 0.0 ? which : -1);
    }
}

CellLocator::Hit CellLocator::make_hit(int t, double cosh_d) const {
    const Translate& tr = translates_[static_cast<std::size_t>(t)];
    Hit h;
    h.center = tr.center;
    h.element = tr.element;
    h.position = tr.point;
    h.distance = cosh_d <= 1.0 ? 0.0 : std::acosh(cosh_d);
    h.translate = t;
    return h;
}

namespace {

// Lowest cosh distance; a candidate replaces the current best only if
// strictly closer beyond rounding, so ties keep the earliest translate.
template <typename It, typename PointOf>
int nearest(It begin, It end, const V3& x, PointOf point_of, double* best_cosh) {
    int arg = -1;
    double best = std::numeric_limits<double>::infinity();
    for (It it = begin; it != end; ++it) {
        const double c = -mink(point_of(*it), x);
        if (arg < 0 || c < best - 1e-13 * best) {
            best = c;
            arg = static_cast<int>(*it);
        }
    }
    *best_cosh = best;
    return arg;
}

}  // namespace

CellLocator::Hit CellLocator::brute_force(const V3& x) const {
    std::vector<int> all(translates_.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        all[i] = static_cast<int>(i);
    }
    double best = 0.0;
    const int arg = nearest(all.begin(), all.end(), x,
                            [&](int i) -> const V3& { return translates_[static_cast<std::size_t>(i)].point; },
                            &best);
    if (arg < 0 || best > std::cosh(keep_radius_)) {
        throw Error("cell lookup failure: no net centre within " + std::to_string(keep_radius_) +
                    " of the point (outside the region covered by the net)");
    }
    return make_hit(arg, best);
}

const CellLocator::Bin& CellLocator::bin_for(const V3& x) const {
    const Polar p = polar_of(to_base_, x);
    const BinGeometry fine = bin_geometry(p, kRing);
    auto it = fine_.find(fine.key);
    if (it != fine_.end()) {
        return it->second;
    }
    const M3 from_base = boost_to(m_->base);
    const BinGeometry coarse = bin_geometry(p, kCoarseRing);
    auto cit = coarse_.find(coarse.key);
    if (cit == coarse_.end()) {
        Bin b;
        const V3 centre = polar_point(from_base, coarse.r_mid, coarse.phi_mid);
        const double lim = std::cosh(coarse.half_diag + keep_radius_);
        for (std::size_t i = 0; i < translates_.size(); ++i) {
            if (-mink(translates_[i].point, centre) <= lim) {
                b.candidates.push_back(static_cast<int>(i));
            }
        }
        cit = coarse_.emplace(coarse.key, std::move(b)).first;
    }
    Bin b;
    const V3 centre = polar_point(from_base, fine.r_mid, fine.phi_mid);
    const double lim = std::cosh(fine.half_diag + keep_radius_);
    for (int i : cit->second.candidates) {
        if (-mink(translates_[static_cast<std::size_t>(i)].point, centre) <= lim) {
            b.candidates.push_back(i);
        }
    }
    return fine_.emplace(fine.key, std::move(b)).first->second;
}

CellLocator::Hit CellLocator::locate_in_domain(const V3& x) const {
    const Bin& bin = bin_for(x);
    double best = 0.0;
    const int arg = nearest(bin.candidates.begin(), bin.candidates.end(), x,
                            [&](int i) -> const V3& { return translates_[static_cast<std::size_t>(i)].point; },
                            &best);
    // a translate within keep_radius of x lies in the candidate list, so a
    // hit that close is the global nearest
    if (arg >= 0 && best <= std::cosh(keep_radius_)) {
        return make_hit(arg, best);
    }
    return brute_force(x);
}

CellLocator::Hit CellLocator::locate(const V3& x) const {
    const Reduction r = reduce_to_domain(x, *m_);
    Hit h = locate_in_domain(r.point);
    h.element = r.gamma * h.element;
    h.position = renormalize(r.gamma * h.position);
    return h;
}

// ------------------------------------------------------------------- net

namespace {

// Incremental nearest-centre distances (as cosh) for a fixed point set.
class Coverage {
public:
    Coverage(const SurfaceModel& m, std::vector<V3> points)
        : m_(m), points_(std::move(points)), best_(points_.size(), std::numeric_limits<double>::infinity()) {
        const std::vector<Word> words = reduced_words(m, kTranslateWordLength);
        for (const Word& w : words) {
            mats_.push_back(word_matrix(m, w));
        }
    }

    void add(const V3& c) {
        std::vector<V3> near;
        const double keep = std::sinh(1.0);
        for (const M3& g : mats_) {
            const V3 p = renormalize(g * c);
            if (std::all_of(m_.walls.begin(), m_.walls.end(),
                            [&](const V3& w) { return mink(p, w) <= keep; })) {
                near.push_back(p);
            }
        }
        for (std::size_t i = 0; i < points_.size(); ++i) {
            for (const V3& p : near) {
                best_[i] = std::min(best_[i], -mink(points_[i], p));
            }
        }
    }

    const std::vector<V3>& points() const { return points_; }
    double distance(std::size_t i) const { return best_[i] <= 1.0 ? 0.0 : std::acosh(best_[i]); }

private:
    const SurfaceModel& m_;
    std::vector<V3> points_;
    std::vector<double> best_;
    std::vector<M3> mats_;
};

std::vector<V3> core_points(const SurfaceModel& m, int n, std::uint64_t seed) {
    std::vector<V3> out;
    out.reserve(static_cast<std::size_t>(n));
    HaarSampler h(m, seed, 0.0);
    for (int i = 0; i < n; ++i) {
        out.push_back(h.next().point);
    }
    return out;
}

// Funnel points up to the given depth, reduced into D.
std::vector<V3> funnel_points(const SurfaceModel& m, int n, double depth, std::uint64_t seed) {
    std::vector<V3> out;
    if (m.closed() || depth <= 0.0) {
        return out;
    }
    Rng rng(seed);
    const LiftFrame f = lift_frame(m, m.boundary.front());
    for (int i = 0; i < n; ++i) {
        const double s = uniform01(rng) * m.boundary_length;
        const double t = std::asinh(uniform01(rng) * std::sinh(depth));
        out.push_back(reduce_to_domain(renormalize(f.point(s, t)), m).point);
    }
    return out;
}

double max_distance(const CellLocator& loc, const std::vector<V3>& pts, std::size_t* arg) {
    double worst = 0.0;
    *arg = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double d = loc.locate_in_domain(pts[i]).distance;
        if (d > worst) {
            worst = d;
            *arg = i;
        }
    }
    return worst;
}

}  // namespace

GammaNet build_net(const SurfaceModel& m, double target_radius, double reach, const NetOptions& opts) {
    if (!(target_radius > 0.0) || target_radius > 0.5) {
        throw Error("build_net: target_radius must lie in (0, 1/2]");
    }
    if (opts.training_samples < 1 || opts.validation_samples < 1) {
        throw Error("build_net: sample counts must be positive");
    }
    GammaNet net;
    net.target_radius = target_radius;
    net.mirrored = !m.closed();
    const double goal = 0.9 * target_radius;
    constexpr std::size_t kMaxCenters = 20000;

    std::vector<V3> training = core_points(m, opts.training_samples, derive_seed(opts.seed, 1));
    std::vector<double> depth(training.size(), std::numeric_limits<double>::infinity());

    if (net.mirrored) {
        if (!(opts.band > 0.0) || !(opts.row_spacing > 0.0) || opts.row_spacing > opts.band) {
            throw Error("build_net: need 0 < row_spacing <= band");
        }
        net.reach = std::max(reach, opts.band);
        const LiftFrame f = lift_frame(m, m.boundary.front());
        const double h = opts.row_spacing;
        for (int k = 0;; ++k) {
            const double t = (k + 0.5) * h;
            const bool inner = t <= opts.band;
            if (!inner && t > net.reach + h) {
                break;
            }
            const double arc = m.boundary_length * std::cosh(t);
            const int count = std::max(1, static_cast<int>(std::ceil(arc / h)));
            for (int side = 0; side < (inner ? 2 : 1); ++side) {
                const double st = side == 0 ? t : -t;
                for (int j = 0; j < count; ++j) {
                    const double s = (j + 0.5) * m.boundary_length / count;
                    net.centers.push_back(reduce_to_domain(renormalize(f.point(s, st)), m).point);
                }
            }
        }
        for (std::size_t i = 0; i < training.size(); ++i) {
            depth[i] = boundary_signed_distance(training[i], m);
        }
    } else {
        net.centers.push_back(m.base);
    }

    Coverage cov(m, std::move(training));
    for (const V3& c : net.centers) {
        cov.add(c);
    }
    for (;;) {
        std::size_t arg_fill = 0;
        double worst_all = -1.0;
        double worst_fill = -1.0;
        for (std::size_t i = 0; i < cov.points().size(); ++i) {
            const double d = cov.distance(i);
            worst_all = std::max(worst_all, d);
            if (depth[i] >= opts.band && d > worst_fill) {
                worst_fill = d;
                arg_fill = i;
            }
        }
        if (worst_all <= goal) {
            break;
        }
        if (worst_fill <= goal) {
            throw Error("build_net: mirrored rows leave the boundary band uncovered; decrease row_spacing");
        }
        if (net.centers.size() >= kMaxCenters) {
            throw Error("build_net: covering not achieved within the centre budget");
        }
        net.centers.push_back(cov.points()[arg_fill]);
        cov.add(net.centers.back());
    }

    // validation on fresh samples; closed mode may add centres a few times
    for (int round = 0;; ++round) {
        net.covering_radius = target_radius;
        const CellLocator loc(m, net);
        std::vector<V3> val = core_points(m, opts.validation_samples, derive_seed(opts.seed, 100 + round));
        std::size_t arg = 0;
        const double worst_core = max_distance(loc, val, &arg);
        double worst = worst_core;
        if (net.mirrored) {
            const std::vector<V3> fun = funnel_points(m, opts.validation_samples, net.reach,
                                                      derive_seed(opts.seed, 200 + round));
            std::size_t farg = 0;
            worst = std::max(worst, max_distance(loc, fun, &farg));
        }
        if (worst <= target_radius) {
            // the greedy phase stops at 0.9 * target, so the validated target
            // is the reported bound rather than the sample maximum
            net.covering_radius = target_radius;
            break;
        }
        const bool can_add = worst_core > target_radius &&
                             (!net.mirrored || boundary_signed_distance(val[arg], m) >= opts.band);
        if (!can_add || round >= 20) {
            throw Error("build_net: covering radius " + std::to_string(worst) +
                        " exceeds the target on validation samples");
        }
        net.centers.push_back(val[arg]);
    }
    return net;
}

}  // namespace hypvol::smear
