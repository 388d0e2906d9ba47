#pragma once

#include "hypvol/hypgeom.hpp"
#include "hypvol/rng.hpp"

#include <cmath>
#include <numbers>

namespace testutil {

inline hypvol::Vec unit_dir(hypvol::Rng& rng, int n) {
    hypvol::Vec d(n);
    double s = 0.0;
    do {
        for (int i = 0; i < n; ++i) {
            d[i] = 2.0 * hypvol::uniform01(rng) - 1.0;
        }
        s = d.norm();
    } while (s < 1e-3 || s > 1.0);
    return d / s;
}

/// Point uniform in direction with radius uniform in [0, rmax].
inline hypvol::HPoint random_point(hypvol::Rng& rng, int n, double rmax) {
    return hypvol::HPoint::polar(rmax * hypvol::uniform01(rng), unit_dir(rng, n));
}

/// Boost to a random point composed with a random rotation in the (1,2) plane.
inline hypvol::Isometry random_isometry(hypvol::Rng& rng, int n, double rmax = 2.0) {
    const double a = 2.0 * std::numbers::pi * hypvol::uniform01(rng);
    return hypvol::Isometry::boost_to(random_point(rng, n, rmax)) * hypvol::Isometry::rotation(n, 1, 2, a);
}

}  // namespace testutil
