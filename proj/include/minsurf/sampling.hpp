#pragma once

// Deterministic quasi-random interior points (Halton 2,3 with rejection).

#include "domain.hpp"

#include <vector>

namespace minsurf {

inline double radical_inverse(long long k, int base) {
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (k > 0) {
        r += f * static_cast<double>(k % base);
        k /= base;
        f *= inv;
    }
    return r;
}

/// First n Halton points of the bounding box that lie in the domain with the
/// given margin. `skip` offsets the sequence.
inline std::vector<cplx> interior_samples(const Domain& d, int n, double margin = 0.0, long long skip = 0) {
    auto [lo, hi] = d.bounding_box();
    std::vector<cplx> pts;
    pts.reserve(static_cast<std::size_t>(n));
    for (long long k = skip + 1; static_cast<int>(pts.size()) < n; ++k) {
        cplx p(lo.real() + (hi.real() - lo.real()) * radical_inverse(k, 2), lo.imag() + (hi.imag() - lo.imag()) * radical_inverse(k, 3));
        if (d.contains(p, margin)) pts.push_back(p);
        if (k > skip + 1000LL * (n + 10)) fail(ErrorCode::DegenerateDomain, "no room for interior samples");
    }
    return pts;
}

} // namespace minsurf
