#include "hypvol/smear.hpp"

#include "hypvol/bounds.hpp"
#include "hypvol/volume.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <thread>

namespace hypvol::smear {

// ------------------------------------------------------------------- keys

SimplexKey::Decoded SimplexKey::decode() const {
    Decoded d;
    std::size_t i = 0;
    const auto byte = [&]() -> std::uint8_t {
        if (i >= bytes.size()) {
            throw Error("SimplexKey: truncated key");
        }
        return static_cast<std::uint8_t>(bytes[i++]);
    };
    while (i < bytes.size()) {
        const int hi = byte();
        const int lo = byte();
        d.centers.push_back(hi * 256 + lo);
        Word w;
        if (d.centers.size() > 1) {
            const int len = byte();
            for (int k = 0; k < len; ++k) {
                w.push_back(byte());
            }
        }
        d.words.push_back(std::move(w));
    }
    return d;
}

SimplexKey SimplexKey::encode(const Decoded& d) {
    if (d.centers.size() != d.words.size() || d.centers.empty() || !d.words.front().empty()) {
        throw Error("SimplexKey: malformed decoded key");
    }
    SimplexKey k;
    for (std::size_t v = 0; v < d.centers.size(); ++v) {
        const int c = d.centers[v];
        if (c < 0 || c > 0xFFFF) {
            throw Error("SimplexKey: centre index out of range");
        }
        k.bytes.push_back(static_cast<char>(c >> 8));
        k.bytes.push_back(static_cast<char>(c & 0xFF));
        if (v > 0) {
            if (d.words[v].size() > 255) {
                throw Error("SimplexKey: word longer than 255 letters");
            }
            k.bytes.push_back(static_cast<char>(d.words[v].size()));
            for (std::uint8_t l : d.words[v]) {
                k.bytes.push_back(static_cast<char>(l));
            }
        }
    }
    return k;
}

std::vector<V3> realize(const SimplexKey& key, const SurfaceModel& m, const GammaNet& net) {
    const SimplexKey::Decoded d = key.decode();
    std::vector<V3> out;
    for (std::size_t v = 0; v < d.centers.size(); ++v) {
        const auto c = static_cast<std::size_t>(d.centers[v]);
        if (c >= net.centers.size()) {
            throw Error("realize: key refers to a centre outside the net");
        }
        out.push_back(apply_word(m, d.words[v], net.centers[c]));
    }
    return out;
}

double sampling_depth(double L) { return L + regular_circumradius(2, L) + 1.0; }

MassBrackets mass_brackets(const SurfaceModel& m, double L) {
    if (m.closed()) {
        return {m.exact_area, m.exact_area};
    }
    return {m.exact_area - tube_factor(2, L + 3.0) * m.boundary_length,
            m.exact_area + tube_factor(2, L) * m.boundary_length};
}

namespace {

std::array<V3, 3> reference_vertices(double L, int sign) {
    const GeodesicSimplex tau = regular_simplex(2, L);
    std::array<V3, 3> q;
    for (int i = 0; i < 3; ++i) {
        const Vec& c = coords_of(tau.vertices()[static_cast<std::size_t>(i)]);
        q[static_cast<std::size_t>(i)] = V3(c[0], c[1], sign > 0 ? c[2] : -c[2]);
    }
    return q;
}

bool same_normal(const V3& a, const V3& b) {
    return (a - b).cwiseAbs().maxCoeff() <= 1e-7 * std::max({1.0, a.cwiseAbs().maxCoeff()});
}

// A point of D in general position. Reduction of a translate steps to the
// nearest image of the base point, so translates of symmetric points (a
// centre on a mirror line of D, say) tie between walls and the word would
// depend on rounding. Reducing the image of this point instead makes the
// word a function of the group element alone.
V3 generic_anchor(const SurfaceModel& m) {
    const V3 nudge(0.0, 0.0731, 0.0412);
    return reduce_to_domain(renormalize(m.base + nudge), m).point;
}

// Canonical descent word of the group element w, which takes centre c to p.
// Rounding in the long matrix products moves p by up to ~1e-6, far below the
// spacing of distinct translates, so the checks only catch a wrong element.
Word word_of(const SurfaceModel& m, const GammaNet& net, int c, const Word& w, const V3& p) {
    const V3& home = net.centers[static_cast<std::size_t>(c)];
    const Reduction r = reduce_to_domain(p, m);
    if ((r.point - home).cwiseAbs().maxCoeff() > 1e-4 * home[0]) {
        throw Error("simplex key: translated centre " + std::to_string(c) + " does not reduce to its representative");
    }
    const V3 anchor = generic_anchor(m);
    const Reduction ra = reduce_to_domain(apply_word(m, w, anchor), m);
    if ((ra.point - anchor).cwiseAbs().maxCoeff() > 1e-4 * anchor[0]) {
        throw Error("simplex key: anchor translate does not reduce to the anchor");
    }
    return ra.word;
}

// Classification and canonical key of the straight simplex on the cells of
// the points x_i. Discarded simplices (inside one exterior component)
// return std::nullopt.
struct Classified {
    SimplexKey key;
    ClassTag tag;
    double max_edge;
};

class Classifier {
public:
    Classifier(const SurfaceModel& m, const GammaNet& net) : m_(m), net_(net), loc_(m, net) {}

    std::optional<Classified> operator()(const std::array<V3, 3>& x) const {
        // word[k] takes centre[k] (in D) to the cell centre of x[k]
        std::array<Word, 3> word;
        std::array<int, 3> center{};
        std::array<bool, 3> interior{};
        std::array<bool, 3> located{};
        std::array<V3, 3> normal;
        for (std::size_t k = 0; k < 3; ++k) {
            const Reduction r = reduce_to_domain(x[k], m_);
            located[k] = true;
            if (!m_.closed()) {
                int which = -1;
                const double d = boundary_signed_distance(r.point, m_, &which);
                if (d < -net_.reach) {
                    // beyond the materialized net: cells do not cross lifts,
                    // so the cell lies in the vertex's own component
                    located[k] = false;
                    interior[k] = false;
                    normal[k] = apply_word(m_, r.word, m_.boundary[static_cast<std::size_t>(which)]);
                    continue;
                }
            }
            const CellLocator::Hit h = loc_.locate_in_domain(r.point);
            center[k] = h.center;
            word[k] = concat_words(m_, r.word, loc_.translate_word(h.translate));
            interior[k] = loc_.center_depth(h.center) >= 0.0;
            if (!interior[k]) {
                const auto lift = static_cast<std::size_t>(loc_.center_lift(h.center));
                normal[k] = apply_word(m_, word[k], m_.boundary[lift]);
            }
        }
        const bool all_ext = !interior[0] && !interior[1] && !interior[2];
        if (all_ext && same_normal(normal[0], normal[1]) && same_normal(normal[0], normal[2])) {
            return std::nullopt;
        }
        if (!(located[0] && located[1] && located[2])) {
            throw Error("cell lookup failure: a simplex meeting the core has a vertex beyond the net reach");
        }
        Classified out;
        out.tag = interior[0] && interior[1] && interior[2] ? ClassTag::interior : ClassTag::exterior;
        SimplexKey::Decoded d;
        const Word back = inverse_word(m_, word[0]);
        std::array<V3, 3> p;
        for (std::size_t k = 0; k < 3; ++k) {
            const V3& c = net_.centers[static_cast<std::size_t>(center[k])];
            d.centers.push_back(center[k]);
            if (k == 0) {
                p[k] = c;
                d.words.emplace_back();
            } else {
                const Word w = concat_words(m_, back, word[k]);
                p[k] = apply_word(m_, w, c);
                d.words.push_back(word_of(m_, net_, center[k], w, p[k]));
            }
        }
        out.key = SimplexKey::encode(d);
        out.max_edge = std::max({dist(p[0], p[1]), dist(p[0], p[2]), dist(p[1], p[2])});
        return out;
    }

    std::optional<Classified> plus_only(const M3& g, const std::array<V3, 3>& q, V3* q0) const {
        std::array<V3, 3> x;
        for (std::size_t i = 0; i < 3; ++i) {
            x[i] = renormalize(g * q[i]);
        }
        *q0 = x[0];
        return (*this)(x);
    }

private:
    const SurfaceModel& m_;
    const GammaNet& net_;
    CellLocator loc_;
};

struct ShardResult {
    std::unordered_map<std::string, ChainEntry> tally;
    std::uint64_t discarded_plus = 0;
    std::uint64_t discarded_minus = 0;
    double max_edge = 0.0;
};

template <typename Work>
void run_shards(std::uint64_t n, const AccumulateOptions& opts, Work work) {
    if (opts.shard_size == 0) {
        throw Error("accumulate: shard_size must be positive");
    }
    const std::uint64_t shards = (n + opts.shard_size - 1) / opts.shard_size;
    const int threads = std::max(1, std::min<int>(opts.threads, static_cast<int>(std::max<std::uint64_t>(shards, 1))));
    if (threads == 1) {
        work(0, 1, shards);
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] { work(t, threads, shards); });
    }
    for (std::thread& th : pool) {
        th.join();
    }
}

}  // namespace

SmearChain accumulate_chain(const SurfaceModel& m, const GammaNet& net, double L, std::uint64_t n,
                            std::uint64_t seed, const AccumulateOptions& opts) {
    if (!(L >= 1.0)) {
        throw Error("accumulate_chain: need L >= 1");
    }
    if (n == 0) {
        throw Error("accumulate_chain: need at least one sample");
    }
    const double depth = m.closed() ? 0.0 : sampling_depth(L);
    if (!m.closed() && net.reach < L) {
        throw Error("accumulate_chain: net reach must be at least L in boundary mode");
    }
    const std::array<std::array<V3, 3>, 2> q{reference_vertices(L, +1), reference_vertices(L, -1)};

    std::vector<ShardResult> results(static_cast<std::size_t>(std::max(1, opts.threads)));
    run_shards(n, opts, [&](int t, int stride, std::uint64_t shards) {
        ShardResult& res = results[static_cast<std::size_t>(t)];
        const Classifier classify(m, net);
        for (std::uint64_t shard = static_cast<std::uint64_t>(t); shard < shards;
             shard += static_cast<std::uint64_t>(stride)) {
            HaarSampler sampler(m, derive_seed(seed, shard), depth);
            const std::uint64_t begin = shard * opts.shard_size;
            const std::uint64_t count = std::min(opts.shard_size, n - begin);
            for (std::uint64_t i = 0; i < count; ++i) {
                const M3 g = frame_matrix(sampler.next());
                for (int sgn = 0; sgn < 2; ++sgn) {
                    std::array<V3, 3> x;
                    for (std::size_t v = 0; v < 3; ++v) {
                        x[v] = renormalize(g * q[static_cast<std::size_t>(sgn)][v]);
                    }
                    const std::optional<Classified> c = classify(x);
                    if (!c) {
                        ++(sgn == 0 ? res.discarded_plus : res.discarded_minus);
                        continue;
                    }
                    ChainEntry& e = res.tally[c->key.bytes];
                    ++(sgn == 0 ? e.b_plus : e.b_minus);
                    e.tag = c->tag;
                    res.max_edge = std::max(res.max_edge, c->max_edge);
                }
            }
        }
    });

    SmearChain chain;
    chain.samples = n;
    chain.L = L;
    chain.seed = seed;
    chain.boundary_mode = !m.closed();
    chain.region_area = m.exact_area + funnel_area(m, depth);
    chain.scale = chain.region_area / static_cast<double>(n);
    std::unordered_map<std::string, ChainEntry> merged = std::move(results.front().tally);
    for (std::size_t t = 0; t < results.size(); ++t) {
        chain.discarded_plus += results[t].discarded_plus;
        chain.discarded_minus += results[t].discarded_minus;
        chain.max_edge = std::max(chain.max_edge, results[t].max_edge);
        if (t == 0) {
            continue;
        }
        for (auto& [k, e] : results[t].tally) {
            ChainEntry& into = merged[k];
            into.b_plus += e.b_plus;
            into.b_minus += e.b_minus;
            into.tag = e.tag;
        }
    }
    chain.entries.reserve(merged.size());
    for (auto& [k, e] : merged) {
        chain.entries.push_back({SimplexKey{k}, e});
    }
    std::sort(chain.entries.begin(), chain.entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return chain;
}

// -------------------------------------------------------------- residuals

std::vector<FaceResidual> boundary_residuals(const SmearChain& chain, const SurfaceModel& m,
                                             const GammaNet& net) {
    struct Acc {
        double signed_count = 0.0;
        double variance = 0.0;
        double expected = 0.0;
    };
    std::map<SimplexKey, Acc> faces;
    const CellLocator info(m, net);
    for (const auto& [key, e] : chain.entries) {
        const SimplexKey::Decoded d = key.decode();
        const std::size_t nv = d.centers.size();
        std::vector<std::pair<SimplexKey, int>> local;
        for (std::size_t k = 0; k < nv; ++k) {
            std::vector<std::size_t> keep;
            for (std::size_t v = 0; v < nv; ++v) {
                if (v != k) {
                    keep.push_back(v);
                }
            }
            // faces lying inside one exterior component do not meet int M
            bool all_ext = true;
            std::vector<V3> normals;
            for (std::size_t v : keep) {
                const int c = d.centers[v];
                if (info.center_depth(c) >= 0.0) {
                    all_ext = false;
                    break;
                }
                normals.push_back(apply_word(m, d.words[v], m.boundary[static_cast<std::size_t>(info.center_lift(c))]));
            }
            if (all_ext && std::all_of(normals.begin(), normals.end(),
                                       [&](const V3& n) { return same_normal(n, normals.front()); })) {
                continue;
            }
            SimplexKey::Decoded f;
            const Word back = inverse_word(m, d.words[keep.front()]);
            for (std::size_t v : keep) {
                f.centers.push_back(d.centers[v]);
                if (v == keep.front()) {
                    f.words.emplace_back();
                    continue;
                }
                const Word w = concat_words(m, back, d.words[v]);
                const V3 at = apply_word(m, w, net.centers[static_cast<std::size_t>(d.centers[v])]);
                f.words.push_back(word_of(m, net, d.centers[v], w, at));
            }
            const int sign = k % 2 == 0 ? 1 : -1;
            const SimplexKey fk = SimplexKey::encode(f);
            auto it = std::find_if(local.begin(), local.end(), [&](const auto& x) { return x.first == fk; });
            if (it == local.end()) {
                local.emplace_back(fk, sign);
            } else {
                it->second += sign;
            }
        }
        const double diff = static_cast<double>(e.b_plus) - static_cast<double>(e.b_minus);
        const double total = static_cast<double>(e.b_plus) + static_cast<double>(e.b_minus);
        for (const auto& [fk, c] : local) {
            Acc& a = faces[fk];
            a.signed_count += c * diff;
            a.variance += static_cast<double>(c * c) * total;
            a.expected += std::abs(c) * total;
        }
    }
    std::vector<FaceResidual> out;
    out.reserve(faces.size());
    for (const auto& [fk, a] : faces) {
        FaceResidual r;
        r.face = fk;
        r.residual = chain.scale * a.signed_count / 2.0;
        r.z_score = a.variance > 0.0 ? a.signed_count / std::sqrt(a.variance) : 0.0;
        r.expected_count = a.expected;
        out.push_back(r);
    }
    return out;
}

// ------------------------------------------------------------------ ratio

RatioReport ratio_report(const SmearChain& chain, const SurfaceModel& m, const GammaNet& net,
                         bool quadrature) {
    RatioReport r;
    double var_omega = 0.0;
    double var_l1 = 0.0;
    const double half = chain.scale / 2.0;
    for (const auto& [key, e] : chain.entries) {
        const double a = chain.coefficient(e);
        const double total = static_cast<double>(e.b_plus) + static_cast<double>(e.b_minus);
        if (e.tag == ClassTag::exterior) {
            r.ext_l1 += std::abs(a);
            r.ext_mass += half * total;
            continue;
        }
        const std::vector<V3> p = realize(key, m, net);
        double area = 0.0;
        if (quadrature) {
            std::vector<Vertex> verts;
            for (const V3& v : p) {
                verts.emplace_back(HPoint::from_coords(Vec(v)));
            }
            area = signed_volume(GeodesicSimplex(std::move(verts)));
        } else {
            area = signed_triangle_area(p[0], p[1], p[2]);
        }
        r.omega += a * area;
        r.l1_norm += std::abs(a);
        var_omega += half * half * total * area * area;
        var_l1 += half * half * total;
    }
    if (!(r.omega > 0.0)) {
        throw Error("ratio_report: omega <= 0 (sample too small or L below the positivity threshold)");
    }
    r.ratio = r.omega / r.l1_norm;
    r.implied_norm_upper = m.exact_area * r.l1_norm / r.omega;
    r.mc_sigma = r.ratio * std::sqrt(var_omega / (r.omega * r.omega) + var_l1 / (r.l1_norm * r.l1_norm));
    return r;
}

// -------------------------------------------------------------- inclusion

InclusionResult inclusion_check(const SurfaceModel& m, const GammaNet& net, double L, std::uint64_t n,
                                std::uint64_t seed, const AccumulateOptions& opts) {
    if (!m.closed() && net.reach < L) {
        throw Error("inclusion_check: net reach must be at least L in boundary mode");
    }
    const double depth = m.closed() ? 0.0 : sampling_depth(L);
    const std::array<V3, 3> q = reference_vertices(L, +1);
    std::vector<InclusionResult> results(static_cast<std::size_t>(std::max(1, opts.threads)));
    run_shards(n, opts, [&](int t, int stride, std::uint64_t shards) {
        InclusionResult& res = results[static_cast<std::size_t>(t)];
        const Classifier classify(m, net);
        for (std::uint64_t shard = static_cast<std::uint64_t>(t); shard < shards;
             shard += static_cast<std::uint64_t>(stride)) {
            HaarSampler sampler(m, derive_seed(seed, shard), depth);
            const std::uint64_t begin = shard * opts.shard_size;
            const std::uint64_t count = std::min(opts.shard_size, n - begin);
            for (std::uint64_t i = 0; i < count; ++i) {
                V3 q0;
                const std::optional<Classified> c = classify.plus_only(frame_matrix(sampler.next()), q, &q0);
                const double d0 = boundary_signed_distance(reduce_to_domain(q0, m).point, m);
                ++res.samples;
                if (d0 >= L + 3.0) {
                    ++res.deep_samples;
                    if (!c || c->tag != ClassTag::interior) {
                        ++res.violations_inner;
                    }
                }
                if (c) {
                    ++res.retained_samples;
                    if (d0 < -L) {
                        ++res.violations_outer;
                    }
                }
            }
        }
    });
    InclusionResult out;
    for (const InclusionResult& r : results) {
        out.samples += r.samples;
        out.deep_samples += r.deep_samples;
        out.retained_samples += r.retained_samples;
        out.violations_inner += r.violations_inner;
        out.violations_outer += r.violations_outer;
    }
    return out;
}

}  // namespace hypvol::smear
