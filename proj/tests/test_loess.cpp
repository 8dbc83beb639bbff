#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "riskpanel/attribution.hpp"
#include "riskpanel/errors.hpp"
#include "riskpanel/util.hpp"

using namespace riskpanel;

TEST_CASE("loess reproduces exactly linear data") {
    std::vector<double> xs, ys;
    for (int i = 0; i < 50; ++i) {
        xs.push_back(0.1 * i);
        ys.push_back(3.0 + 2.0 * 0.1 * i);
    }
    const LoessCurve curve = loess(xs, ys, 0.4, 1, 10);
    for (std::size_t g = 0; g < curve.grid.size(); ++g)
        CHECK(curve.fitted[g] == doctest::Approx(3.0 + 2.0 * curve.grid[g]).epsilon(1e-8));
}

TEST_CASE("loess on constant y is constant") {
    std::vector<double> xs, ys;
    for (int i = 0; i < 30; ++i) {
        xs.push_back(i);
        ys.push_back(7.5);
    }
    const LoessCurve curve = loess(xs, ys, 0.5, 1, 8);
    for (double f : curve.fitted) CHECK(f == doctest::Approx(7.5).epsilon(1e-12));
}

namespace {

// Brute-force weighted local-linear oracle with tricube weights and one
// bisquare pass, mirroring the published smoother definition directly.
double wls_fit_at(const std::vector<double>& xs, const std::vector<double>& ys,
                  const std::vector<double>& robustness, double frac, double x0) {
    const std::size_t n = xs.size();
    const auto q = static_cast<std::size_t>(std::max(2.0, std::ceil(frac * static_cast<double>(n))));
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) dist[i] = std::abs(xs[i] - x0);
    std::vector<double> sorted = dist;
    std::sort(sorted.begin(), sorted.end());
    const double radius = sorted[q - 1];
    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (dist[i] > radius) continue;
        double w = 1.0;
        if (radius > 0) {
            const double u = dist[i] / radius;
            w = std::pow(1.0 - u * u * u, 3);
        }
        w *= robustness[i];
        sw += w;
        swx += w * xs[i];
        swy += w * ys[i];
        swxx += w * xs[i] * xs[i];
        swxy += w * xs[i] * ys[i];
    }
    const double det = sw * swxx - swx * swx;
    const double slope = (sw * swxy - swx * swy) / det;
    return (swy - slope * swx) / sw + slope * x0;
}

}  // namespace

TEST_CASE("loess matches the brute-force weighted least squares oracle") {
    std::mt19937_64 rng(91);
    std::normal_distribution<double> noise(0.0, 0.15);
    std::vector<double> xs, ys;
    for (int i = 0; i < 120; ++i) {
        const double x = static_cast<double>(i) / 119.0 * 6.28;
        xs.push_back(x);
        ys.push_back(std::sin(x) + noise(rng));
    }
    const double frac = 0.4;
    const LoessCurve curve = loess(xs, ys, frac, 1, 10);

    // Oracle on the clipped point set.
    const double lo = quantile(xs, 0.05), hi = quantile(xs, 0.95);
    std::vector<double> cx, cy;
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (xs[i] >= lo && xs[i] <= hi) {
            cx.push_back(xs[i]);
            cy.push_back(ys[i]);
        }
    // Pass 1: unit robustness; then bisquare reweighting; pass 2 at grid.
    std::vector<double> robustness(cx.size(), 1.0);
    std::vector<double> resid(cx.size()), abs_resid(cx.size());
    for (std::size_t i = 0; i < cx.size(); ++i) {
        resid[i] = cy[i] - wls_fit_at(cx, cy, robustness, frac, cx[i]);
        abs_resid[i] = std::abs(resid[i]);
    }
    const double s = quantile(abs_resid, 0.5);
    for (std::size_t i = 0; i < cx.size(); ++i) {
        const double u = resid[i] / (6.0 * s);
        robustness[i] = std::abs(u) < 1.0 ? (1.0 - u * u) * (1.0 - u * u) : 0.0;
    }
    for (std::size_t g = 0; g < curve.grid.size(); ++g) {
        const double oracle = wls_fit_at(cx, cy, robustness, frac, curve.grid[g]);
        CHECK(curve.fitted[g] == doctest::Approx(oracle).epsilon(1e-8));
    }
}

TEST_CASE("loess is invariant to input point ordering") {
    std::mt19937_64 rng(92);
    std::normal_distribution<double> noise(0.0, 0.3);
    std::vector<double> xs, ys;
    for (int i = 0; i < 80; ++i) {
        xs.push_back(noise(rng));
        ys.push_back(xs.back() * xs.back() + noise(rng));
    }
    const LoessCurve a = loess(xs, ys, 0.4, 1, 12);
    // Shuffle jointly.
    std::vector<std::size_t> perm(xs.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> xs2, ys2;
    for (std::size_t i : perm) {
        xs2.push_back(xs[i]);
        ys2.push_back(ys[i]);
    }
    const LoessCurve b = loess(xs2, ys2, 0.4, 1, 12);
    REQUIRE(a.grid.size() == b.grid.size());
    for (std::size_t g = 0; g < a.grid.size(); ++g) {
        CHECK(a.grid[g] == doctest::Approx(b.grid[g]).epsilon(1e-14));
        CHECK(a.fitted[g] == doctest::Approx(b.fitted[g]).epsilon(1e-10));
    }
}

TEST_CASE("loess records clip bounds and rejects tiny inputs") {
    std::vector<double> xs = {1, 2, 3, 4};
    std::vector<double> ys = {1, 2, 3, 4};
    CHECK_THROWS_AS(loess(xs, ys), ValidationError);

    std::vector<double> bx, by;
    for (int i = 0; i < 100; ++i) {
        bx.push_back(i);
        by.push_back(2.0 * i);
    }
    const LoessCurve curve = loess(bx, by, 0.4, 1, 5);
    CHECK(curve.clip_lo == doctest::Approx(quantile(bx, 0.05)));
    CHECK(curve.clip_hi == doctest::Approx(quantile(bx, 0.95)));
    CHECK(curve.grid.front() >= curve.clip_lo);
    CHECK(curve.grid.back() <= curve.clip_hi);
}
