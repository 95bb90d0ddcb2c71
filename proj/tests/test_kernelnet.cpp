#include "helpers.hpp"

#include "lcbf/kernelnet.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace lcbf;

namespace {

std::shared_ptr<const KernelNet> default_net() {
    const Workspace ws;
    return KernelNet::make(resolve_kernel_config(LearnerConfig{}, ws), ws);
}

Vec2 fd_gradient(const KernelNet& net, const Vec2& q, const Vec2& s, double h = 1e-5) {
    const Vec2 ex(h, 0.0), ey(0.0, h);
    return {(net.kernel(q + ex, s) - net.kernel(q - ex, s)) / (2 * h),
            (net.kernel(q + ey, s) - net.kernel(q - ey, s)) / (2 * h)};
}

}  // namespace

TEST_SUITE("kernelnet") {

TEST_CASE("resolved defaults") {
    const KernelConfig cfg = resolve_kernel_config(LearnerConfig{}, Workspace{});
    CHECK(cfg.grid_spacing == doctest::Approx(0.16));
    CHECK(cfg.sigma1 == doctest::Approx(0.32));
    CHECK(cfg.sigma2 == 1.0);
    LearnerConfig explicit_cfg;
    explicit_cfg.grid_spacing = 0.2;
    explicit_cfg.sigma1 = 0.1;
    const KernelConfig e = resolve_kernel_config(explicit_cfg, Workspace{});
    CHECK(e.grid_spacing == 0.2);
    CHECK(e.sigma1 == 0.1);
    CHECK_THROWS_AS((KernelConfig{0.1, 0.0, 0.1}.validate()), Error);
}

TEST_CASE("featurize examples") {
    const FeatureMap map(Workspace{}, 0.16, 0.32);
    CHECK(map.size() == 21 * 14);
    const Vec2 c = map.centers().col(37);
    const Eigen::VectorXd f = featurize(map, c);
    CHECK(f(37) == 1.0);
    const Eigen::VectorXd g = featurize(map, c + Vec2(0.32, 0.0));
    CHECK(g(37) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(std::exp(-1.0) == doctest::Approx(0.367879).epsilon(1e-6));
    std::mt19937_64 rng(1);
    for (int k = 0; k < 50; ++k) {
        const Eigen::VectorXd v = map.featurize(testing::uniform_point(rng, Workspace{}));
        CHECK(v.minCoeff() > 0.0);
        CHECK(v.maxCoeff() <= 1.0);
    }
}

TEST_CASE("kernel identity and symmetry") {
    const auto net = default_net();
    std::mt19937_64 rng(2);
    for (int k = 0; k < 100; ++k) {
        const Vec2 a = testing::uniform_point(rng, Workspace{});
        const Vec2 b = testing::uniform_point(rng, Workspace{});
        CHECK(net->kernel(a, a) == 1.0);
        CHECK(net->kernel(a, b) == net->kernel(b, a));
        CHECK(net->kernel(a, b) < 1.0);
    }
    const KernelConfig cfg = net->config();
    CHECK(kernel(cfg, net->map(), {1.0, 1.0}, {1.0, 1.0}) == 1.0);
}

TEST_CASE("gram matrices are positive semidefinite") {
    const auto net = default_net();
    std::mt19937_64 rng(3);
    for (int n : {3, 3, 3, 20, 60}) {
        std::vector<Vec2> pts;
        for (int i = 0; i < n; ++i) pts.push_back(testing::uniform_point(rng, Workspace{}));
        Eigen::MatrixXd g(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) g(i, j) = net->kernel(pts[i], pts[j]);
        CHECK((g - g.transpose()).norm() == 0.0);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (g + g.transpose()));
        CHECK(es.eigenvalues().minCoeff() >= (n == 3 ? -1e-10 : -1e-8));
    }
}

TEST_CASE("analytic gradient matches central differences") {
    const auto net = default_net();
    std::mt19937_64 rng(4);
    std::normal_distribution<double> near(0.0, 0.3);
    for (int k = 0; k < 100; ++k) {
        const Vec2 q = testing::uniform_point(rng, Workspace{});
        const Vec2 s = q + Vec2(near(rng), near(rng));
        const Vec2 g = net->kernel_gradient(q, s);
        const Vec2 fd = fd_gradient(*net, q, s);
        CHECK((g - fd).norm() <= 1e-5 * std::max(g.norm(), 1e-3));
        CHECK((kernel_gradient(net->config(), net->map(), q, s) - g).norm() == 0.0);
    }
}

TEST_CASE("gradient vanishes at the support") {
    const auto net = default_net();
    CHECK(net->kernel_gradient({1.3, 0.7}, {1.3, 0.7}).norm() == 0.0);
}

TEST_CASE("single-center limit is antisymmetric") {
    Eigen::Matrix2Xd one(2, 1);
    one << 0.0, 0.0;
    const KernelNet single(FeatureMap(one, 1.0, 1.0), 0.5);
    const Vec2 a(0.3, 0.0), b(-0.3, 0.0);
    const Vec2 ga = single.kernel_gradient(a, b);
    const Vec2 gb = single.kernel_gradient(b, a);
    // phi(a) == phi(b), so the kernel is flat in the feature difference at this pair.
    CHECK(ga.norm() < 1e-15);
    CHECK(gb.norm() < 1e-15);
    const Vec2 c(0.6, 0.2), d(0.1, -0.4);
    CHECK((single.kernel_gradient(c, d) - fd_gradient(single, c, d)).norm() < 1e-8);

    // A dense wide grid makes the feature distance a function of a - b alone.
    Workspace wide{-4.0, 4.0, -4.0, 4.0};
    const KernelNet dense(FeatureMap(wide, 0.1, 0.3), 3.0);
    const Vec2 p(0.12, -0.05), q(-0.07, 0.11);
    const Vec2 gp = dense.kernel_gradient(p, q);
    const Vec2 gq = dense.kernel_gradient(q, p);
    CHECK((gp + gq).norm() <= 1e-6 * gp.norm());
}

}  // TEST_SUITE
