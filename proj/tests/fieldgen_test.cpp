#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "dfk/fieldgen.hpp"
#include "dfk/rng.hpp"

using namespace dfk;

namespace {

Box sym_box(int d, double half = 1.0) {
    Box b;
    for (int a = 0; a < d; ++a) {
        b.lo[a] = -half;
        b.hi[a] = half;
    }
    return b;
}

double fd_divergence(const std::function<Vec(const Vec&)>& u, const Vec& p, int d, double step) {
    double div = 0.0;
    for (int a = 0; a < d; ++a) {
        Vec hi = p, lo = p;
        hi[a] += step;
        lo[a] -= step;
        div += (u(hi)[a] - u(lo)[a]) / (2.0 * step);
    }
    return div;
}

double fd_curl_z(const std::function<Vec(const Vec&)>& u, const Vec& p, double step) {
    Vec xp = p, xm = p, yp = p, ym = p;
    xp.x += step;
    xm.x -= step;
    yp.y += step;
    ym.y -= step;
    return (u(xp).y - u(xm).y) / (2.0 * step) - (u(yp).x - u(ym).x) / (2.0 * step);
}

}  // namespace

TEST_CASE("vortex3d anchor values") {
    CHECK(norm(eval_vortex3d(Vec{0, 0, 0})) == 0.0);
    const Vec u = eval_vortex3d(Vec{0.5, 0, 0});
    CHECK(u.x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(u.y == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(u.z == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("vortex3d is divergence-free and tangent to the domain boundary") {
    Rng rng(3);
    for (int q = 0; q < 1000; ++q) {
        const Vec p{2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0,
                    2.0 * rng.uniform() - 1.0};
        CHECK(std::abs(fd_divergence(eval_vortex3d, p, 3, 1e-5)) < 1e-6);
    }
    // exact zero normal flow through every face of [-1,1]^3
    for (int axis = 0; axis < 3; ++axis)
        for (double side : {-1.0, 1.0})
            for (int q = 0; q < 50; ++q) {
                Vec p{2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0,
                      2.0 * rng.uniform() - 1.0};
                p[axis] = side;
                CHECK(std::abs(eval_vortex3d(p)[axis]) < 1e-12);
            }
}

TEST_CASE("vortex2d is divergence-free with the classic cellular vorticity") {
    Rng rng(5);
    const double pi = std::numbers::pi;
    for (int q = 0; q < 500; ++q) {
        const Vec p{2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0, 0.0};
        CHECK(std::abs(fd_divergence(eval_vortex2d, p, 2, 1e-5)) < 1e-6);
        const double w = fd_curl_z(eval_vortex2d, p, 1e-5);
        CHECK(w == doctest::Approx(2.0 * pi * std::sin(pi * p.x) * std::sin(pi * p.y))
                       .epsilon(1e-4));
    }
    CHECK(eval_vortex2d(Vec{0.5, 0.0, 0.0}).x == doctest::Approx(1.0).epsilon(1e-12));
    // zero normal flow through integer-coordinate walls
    CHECK(std::abs(eval_vortex2d(Vec{1.0, 0.37, 0.0}).x) < 1e-12);
    CHECK(std::abs(eval_vortex2d(Vec{-0.21, 1.0, 0.0}).y) < 1e-12);
}

TEST_CASE("mixed2d is vortex2d plus a curl-free bump") {
    Rng rng(7);
    auto contamination = [](const Vec& p) { return eval_mixed2d(p) - eval_vortex2d(p); };
    for (int q = 0; q < 200; ++q) {
        const Vec p{2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0, 0.0};
        CHECK(std::abs(fd_curl_z(contamination, p, 1e-5)) < 1e-6);
    }
}

TEST_CASE("gradient bump is curl-free") {
    Rng rng(9);
    const Vec center{0.2, -0.4, 0.0};
    auto g = [&](const Vec& p) { return eval_gradient_bump(p, center, 0.3); };
    for (int q = 0; q < 200; ++q) {
        const Vec p{2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0, 0.0};
        CHECK(std::abs(fd_curl_z(g, p, 1e-5)) < 1e-6);
    }
}

TEST_CASE("sampled velocity grids evaluate the function at node positions") {
    const GridField grid = sample_velocity_grid(2, {9, 9, 1}, sym_box(2), eval_vortex2d);
    CHECK(grid.channels == 2);
    for (uint32_t j = 0; j < 9; ++j)
        for (uint32_t i = 0; i < 9; ++i) {
            const Vec p = grid.node_pos(i, j, 0);
            const Vec u = eval_vortex2d(p);
            CHECK(grid.at(i, j, 0, 0) == u.x);
            CHECK(grid.at(i, j, 0, 1) == u.y);
        }
}

TEST_CASE("projection pair: clean base plus seeded curl-free contamination") {
    const auto [clean, dirty] = gen_projection_pair(2, {33, 33, 1}, sym_box(2), 1.0, 42);
    REQUIRE(clean.dims[0] == 33);
    REQUIRE(dirty.dims[0] == 33);
    // clean part is exactly the sampled vortex2d
    for (uint32_t j = 0; j < 33; j += 4)
        for (uint32_t i = 0; i < 33; i += 4) {
            const Vec u = eval_vortex2d(clean.node_pos(i, j, 0));
            CHECK(clean.at(i, j, 0, 0) == u.x);
            CHECK(clean.at(i, j, 0, 1) == u.y);
        }
    // contamination is non-trivial and deterministic per seed
    double diff = 0.0;
    for (size_t i = 0; i < clean.data.size(); ++i)
        diff = std::max(diff, std::abs(clean.data[i] - dirty.data[i]));
    CHECK(diff > 0.1);
    const auto [clean2, dirty2] = gen_projection_pair(2, {33, 33, 1}, sym_box(2), 1.0, 42);
    CHECK(dirty.data == dirty2.data);
    const auto [clean3, dirty3] = gen_projection_pair(2, {33, 33, 1}, sym_box(2), 1.0, 43);
    CHECK(dirty.data != dirty3.data);
}

TEST_CASE("projection pair contamination is curl-free in 3d too") {
    const auto [clean, dirty] = gen_projection_pair(3, {17, 17, 17}, sym_box(3), 0.5, 7);
    // grid-level FD curl of (dirty - clean) vanishes up to O(h^2) truncation
    const double dx = clean.spacing(0);
    double worst = 0.0;
    for (uint32_t k = 1; k < 16; ++k)
        for (uint32_t j = 1; j < 16; ++j)
            for (uint32_t i = 1; i < 16; ++i) {
                auto c = [&](uint32_t ii, uint32_t jj, uint32_t kk, int ch) {
                    return dirty.at(ii, jj, kk, ch) - clean.at(ii, jj, kk, ch);
                };
                const double wx = (c(i, j + 1, k, 2) - c(i, j - 1, k, 2)) / (2 * dx) -
                                  (c(i, j, k + 1, 1) - c(i, j, k - 1, 1)) / (2 * dx);
                const double wy = (c(i, j, k + 1, 0) - c(i, j, k - 1, 0)) / (2 * dx) -
                                  (c(i + 1, j, k, 2) - c(i - 1, j, k, 2)) / (2 * dx);
                const double wz = (c(i + 1, j, k, 1) - c(i - 1, j, k, 1)) / (2 * dx) -
                                  (c(i, j + 1, k, 0) - c(i, j - 1, k, 0)) / (2 * dx);
                worst = std::max({worst, std::abs(wx), std::abs(wy), std::abs(wz)});
            }
    CHECK(worst < 0.5);  // truncation of the grid curl, not exact zero
}

TEST_CASE("laminar stitch hides exactly the annulus") {
    const Box domain = sym_box(2);
    const Box outer = sym_box(2, 0.6);
    const Box inner = sym_box(2, 0.25);
    const StitchData data = gen_laminar_stitch(90.0, outer, inner, {41, 41, 1}, domain);
    REQUIRE(data.mask.channels == 1);
    size_t supervised = 0;
    for (uint32_t j = 0; j < 41; ++j)
        for (uint32_t i = 0; i < 41; ++i) {
            const Vec p = data.mask.node_pos(i, j, 0);
            const bool hidden = outer.contains(p, 2) && !inner.contains(p, 2);
            CHECK(data.mask.at(i, j, 0, 0) == (hidden ? 0.0 : 1.0));
            if (!hidden) {
                ++supervised;
                const Vec u{data.field.at(i, j, 0, 0), data.field.at(i, j, 0, 1), 0.0};
                if (inner.contains(p, 2)) {
                    // 90 degrees: +x rotated to +y
                    CHECK(u.x == doctest::Approx(0.0).epsilon(1e-12));
                    CHECK(u.y == doctest::Approx(1.0).epsilon(1e-12));
                } else {
                    CHECK(u.x == doctest::Approx(1.0).epsilon(1e-12));
                    CHECK(u.y == doctest::Approx(0.0).epsilon(1e-12));
                }
            }
        }
    CHECK(data.observations.points.size() == supervised);
    CHECK(supervised < data.mask.node_count());

    // 0 degrees: the annulus-completed field is the uniform flow everywhere
    const StitchData flat = gen_laminar_stitch(0.0, outer, inner, {41, 41, 1}, domain);
    for (const Vec& v : flat.observations.values) {
        CHECK(v.x == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(v.y == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("laminar stitch validates the box nesting") {
    const Box domain = sym_box(2);
    CHECK_THROWS_AS(gen_laminar_stitch(0.0, sym_box(2, 0.3), sym_box(2, 0.5), {9, 9, 1}, domain),
                    std::invalid_argument);
}

TEST_CASE("constant-velocity advected scalar is the exactly shifted blob") {
    const Vec u{0.3, -0.2, 0.0};
    const Vec center{-0.4, 0.1, 0.0};
    const double sigma = 0.2, dt = 0.05;
    const ScalarSequence seq = gen_advected_scalar({21, 21, 1}, sym_box(2), 5, dt, u, center, sigma);
    CHECK(seq.frames() == 5);
    CHECK(seq.dt == dt);
    for (int f = 0; f < 5; ++f)
        for (uint32_t j = 0; j < 21; j += 3)
            for (uint32_t i = 0; i < 21; i += 3) {
                const Vec p = seq.grid.node_pos(i, j, 0);
                const double expected = eval_blob(p - u * (f * dt), center, sigma);
                CHECK(seq.sigma(f, i, j, 0) == doctest::Approx(expected).epsilon(1e-14));
            }
}

TEST_CASE("rk4 backtrace reproduces the exact shift for constant velocity") {
    const Vec u{0.25, 0.15, 0.0};
    const Vec center{-0.3, -0.2, 0.0};
    const ScalarSequence exact =
        gen_advected_scalar({17, 17, 1}, sym_box(2), 4, 0.1, u, center, 0.25);
    const ScalarSequence traced = gen_advected_scalar(
        {17, 17, 1}, sym_box(2), 4, 0.1, [&](const Vec&) { return u; }, 4, center, 0.25);
    REQUIRE(exact.grid.data.size() == traced.grid.data.size());
    for (size_t i = 0; i < exact.grid.data.size(); ++i)
        CHECK(std::abs(exact.grid.data[i] - traced.grid.data[i]) < 1e-12);
}

TEST_CASE("grid noise is seeded and roughly standard") {
    GridField grid = GridField::make(2, 1, {64, 64, 1}, sym_box(2));
    add_grid_noise(grid, 0.25, 13);
    double mean = 0.0;
    for (double v : grid.data) mean += v;
    mean /= static_cast<double>(grid.data.size());
    double var = 0.0;
    for (double v : grid.data) var += (v - mean) * (v - mean);
    var /= static_cast<double>(grid.data.size() - 1);
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::sqrt(var) == doctest::Approx(0.25).epsilon(0.1));
    GridField again = GridField::make(2, 1, {64, 64, 1}, sym_box(2));
    add_grid_noise(again, 0.25, 13);
    CHECK(grid.data == again.data);
}

TEST_CASE("named generators cover the documented cases") {
    CHECK(generate_named("vortex3d", {9, 9, 9}, sym_box(3)).channels == 3);
    CHECK(generate_named("analytic-vortices", {9, 9, 9}, sym_box(3)).channels == 3);
    CHECK(generate_named("vortex2d", {9, 9, 1}, sym_box(2)).channels == 2);
    CHECK(generate_named("mixed2d", {9, 9, 1}, sym_box(2)).channels == 2);
    CHECK_THROWS_AS(generate_named("warp-core", {9, 9, 1}, sym_box(2)), std::invalid_argument);
}
