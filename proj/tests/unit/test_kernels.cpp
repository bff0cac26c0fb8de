#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "evcs/error.hpp"
#include "evcs/nn/kernels.hpp"

using namespace evcs::nn::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

// Reassociation inside the vector kernel changes rounding, so agreement is
// relative to the magnitude of the summed terms.
void check_close(const std::vector<double>& a, const std::vector<double>& b, double scale) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12 * scale);
}

const std::size_t kSizes[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 33, 64, 65, 127};

}  // namespace

TEST_CASE("scalar kernels match textbook loops") {
    const auto& k = scalar_table();
    std::mt19937_64 rng(1);
    const std::size_t rows = 5, cols = 7;
    const auto w = random_vec(rows * cols, rng), x = random_vec(cols, rng), b = random_vec(rows, rng);
    std::vector<double> y(rows);
    k.gemv(w.data(), rows, cols, x.data(), b.data(), y.data());
    for (std::size_t r = 0; r < rows; ++r) {
        double s = b[r];
        for (std::size_t c = 0; c < cols; ++c) s += w[r * cols + c] * x[c];
        CHECK(y[r] == doctest::Approx(s).epsilon(1e-14));
    }
    k.gemv(w.data(), rows, cols, x.data(), nullptr, y.data());
    double s0 = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s0 += w[c] * x[c];
    CHECK(y[0] == doctest::Approx(s0).epsilon(1e-14));

    std::vector<double> dx(cols, 1.0);
    k.gemv_t_acc(w.data(), rows, cols, b.data(), dx.data());
    for (std::size_t c = 0; c < cols; ++c) {
        double s = 1.0;
        for (std::size_t r = 0; r < rows; ++r) s += w[r * cols + c] * b[r];
        CHECK(dx[c] == doctest::Approx(s).epsilon(1e-14));
    }

    std::vector<double> dw(rows * cols, 0.5);
    k.outer_acc(dw.data(), rows, cols, b.data(), x.data());
    CHECK(dw[3 * cols + 4] == doctest::Approx(0.5 + b[3] * x[4]).epsilon(1e-14));

    CHECK(k.dot(x.data(), x.data(), 0) == 0.0);
}

TEST_CASE("scalar adam step") {
    double p = 1.0, g = 0.5, m = 0.0, v = 0.0;
    AdamCoeffs c;
    c.lr = 0.1;
    c.bias1 = 1.0 - 0.9;
    c.bias2 = 1.0 - 0.999;
    scalar_table().adam(&p, &g, &m, &v, 1, c);
    CHECK(m == doctest::Approx(0.05));
    CHECK(v == doctest::Approx(0.00025));
    // First bias-corrected step moves by lr * g / (|g| + eps').
    CHECK(p == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-12));
}

TEST_CASE("vector kernels agree with scalar ones") {
    const KernelTable* v = avx2_table();
    if (v == nullptr || !backend_available(Backend::avx2)) {
        MESSAGE("AVX2 not available; skipping equivalence");
        return;
    }
    const auto& s = scalar_table();
    std::mt19937_64 rng(7);
    for (std::size_t n : kSizes) {
        CAPTURE(n);
        const auto a = random_vec(n, rng), b = random_vec(n, rng);
        CHECK(std::abs(v->dot(a.data(), b.data(), n) - s.dot(a.data(), b.data(), n)) <= 1e-12 * (n + 1));

        for (std::size_t rows : {std::size_t{1}, std::size_t{3}, std::size_t{6}}) {
            const auto w = random_vec(rows * n, rng), bias = random_vec(rows, rng), dy = random_vec(rows, rng);
            std::vector<double> ys(rows), yv(rows);
            s.gemv(w.data(), rows, n, a.data(), bias.data(), ys.data());
            v->gemv(w.data(), rows, n, a.data(), bias.data(), yv.data());
            check_close(ys, yv, static_cast<double>(n + 1));
            s.gemv(w.data(), rows, n, a.data(), nullptr, ys.data());
            v->gemv(w.data(), rows, n, a.data(), nullptr, yv.data());
            check_close(ys, yv, static_cast<double>(n + 1));

            std::vector<double> dxs = b, dxv = b;
            s.gemv_t_acc(w.data(), rows, n, dy.data(), dxs.data());
            v->gemv_t_acc(w.data(), rows, n, dy.data(), dxv.data());
            check_close(dxs, dxv, static_cast<double>(rows + 1));

            std::vector<double> dws = w, dwv = w;
            s.outer_acc(dws.data(), rows, n, dy.data(), a.data());
            v->outer_acc(dwv.data(), rows, n, dy.data(), a.data());
            check_close(dws, dwv, 2.0);
        }

        auto ps = random_vec(n, rng), pv = ps;
        const auto g = random_vec(n, rng);
        std::vector<double> ms(n, 0.01), mv(n, 0.01), vs(n, 0.02), vv(n, 0.02);
        AdamCoeffs c;
        c.lr = 0.01;
        c.bias1 = 1.0 - std::pow(0.9, 3);
        c.bias2 = 1.0 - std::pow(0.999, 3);
        s.adam(ps.data(), g.data(), ms.data(), vs.data(), n, c);
        v->adam(pv.data(), g.data(), mv.data(), vv.data(), n, c);
        check_close(ps, pv, 1.0);
        check_close(ms, mv, 1.0);
        check_close(vs, vv, 1.0);
    }
}

TEST_CASE("backend selection") {
    const Backend before = active_backend();
    set_backend(Backend::scalar);
    CHECK(active_backend() == Backend::scalar);
    CHECK(&active() == &scalar_table());
    if (backend_available(Backend::avx2)) {
        set_backend(Backend::avx2);
        CHECK(&active() == avx2_table());
    } else {
        CHECK_THROWS_AS(set_backend(Backend::avx2), evcs::ConfigError);
    }
    set_backend(before);
    CHECK(std::string(backend_name(Backend::scalar)) == "scalar");
}
