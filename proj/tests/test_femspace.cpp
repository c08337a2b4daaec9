#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dpns/femspace.hpp"
#include "dpns/rng.hpp"
#include "dpns/verify.hpp"

#include <cmath>

using namespace dpns;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("quadrature exactness on the reference triangle") {
    // int_T x^a y^b = a! b! / (a+b+2)!
    auto factorial = [](int n) {
        double f = 1;
        for (int k = 2; k <= n; ++k)
            f *= k;
        return f;
    };
    const Mesh ref = [] {
        Mesh m;
        m.nodes = {{0, 0}, {1, 0}, {0, 1}};
        m.triangles = {{{0, 1, 2}, Region::Fluid}};
        m.h = std::sqrt(2.0);
        return m;
    }();
    const TriGeom g = tri_geom(ref, 0);
    for (const auto* rule : {&triangle_rule_degree2(), &triangle_rule_degree5()}) {
        double wsum = 0;
        for (double w : rule->weights)
            wsum += w;
        CHECK(wsum == doctest::Approx(0.5).epsilon(1e-15)); // reference measure
        for (int a = 0; a + 0 <= rule->exactness; ++a)
            for (int b = 0; a + b <= rule->exactness; ++b) {
                double acc = 0;
                for (std::size_t q = 0; q < rule->points.size(); ++q) {
                    const auto& l = rule->points[q];
                    const Vec2 p = l[0] * g.p[0] + l[1] * g.p[1] + l[2] * g.p[2];
                    acc += rule->weights[q] * std::pow(p.x, a) * std::pow(p.y, b);
                }
                acc *= 2.0 * g.area;
                const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                CHECK(acc == doctest::Approx(exact).epsilon(1e-13));
            }
    }
    for (int n : {2, 3, 4, 5}) {
        const EdgeRule& er = edge_rule_gauss(n);
        double wsum = 0;
        for (double w : er.weights)
            wsum += w;
        CHECK(wsum == doctest::Approx(1.0).epsilon(1e-15));
        for (int d = 0; d <= er.exactness; ++d) {
            double acc = 0;
            for (std::size_t q = 0; q < er.points.size(); ++q)
                acc += er.weights[q] * std::pow(er.points[q], d);
            CHECK(acc == doctest::Approx(1.0 / (d + 1)).epsilon(1e-13));
        }
    }
}

TEST_CASE("dof counts on the one-cell mesh") {
    const Mesh m = build_two_domain_mesh(1, 1);

    // P1 scalar on the dual cell: 4 corner nodes, all on closed GammaD edges
    const DofMap p1 = build_dofmap(m, {1, 1}, Domain::Dual, {BoundaryTag::GammaD});
    CHECK(p1.n_dofs() == 4);
    int nconstrained = 0;
    for (char c : p1.constrained)
        nconstrained += c;
    CHECK(nconstrained == 4);

    // P2 vector on the fluid cell: 4 vertices + 5 edges, two components
    const DofMap p2v = build_dofmap(m, {2, 2}, Domain::Fluid, {BoundaryTag::GammaS});
    CHECK(p2v.n_dofs() == 2 * (4 + 5));
}

TEST_CASE("dof counts and constraints on the 2x2 mesh") {
    const Mesh m = build_two_domain_mesh(2, 2);
    const DofMap p1 = build_dofmap(m, {1, 1}, Domain::Dual, {BoundaryTag::GammaD});
    CHECK(p1.n_dofs() == 9);
    int nconstrained = 0;
    for (char c : p1.constrained)
        nconstrained += c;
    // bottom row (3) + side walls (2 each, interface endpoints included)
    CHECK(nconstrained == 7);
    // the interior node and the interface midnode stay free
    for (int n = 0; n < static_cast<int>(m.nodes.size()); ++n) {
        const Vec2 p = m.nodes[n];
        const bool interior = std::abs(p.x - 0.5) < 1e-14 && std::abs(p.y - 0.5) < 1e-14;
        const bool iface_mid = std::abs(p.x - 0.5) < 1e-14 && std::abs(p.y - 1.0) < 1e-14;
        if ((interior || iface_mid) && p1.vertex_entity[n] >= 0)
            CHECK(!p1.constrained[p1.vertex_entity[n]]);
    }
}

TEST_CASE("dirichlet values and the interface guard") {
    const Mesh m = build_two_domain_mesh(2, 2);
    const DofMap zero = build_dofmap(m, {2, 2}, Domain::Fluid, {BoundaryTag::GammaS},
                                     [](Vec2, int) { return 0.0; });
    for (int d = 0; d < zero.n_dofs(); ++d)
        if (zero.constrained[d])
            CHECK(zero.prescribed[d] == 0.0);

    const DofMap lin = build_dofmap(m, {2, 1}, Domain::Dual, {BoundaryTag::GammaD},
                                    [](Vec2 p, int) { return p.x + 2 * p.y; });
    for (int ent = 0; ent < lin.n_entities; ++ent)
        if (lin.constrained[ent])
            CHECK(lin.prescribed[ent] ==
                  doctest::Approx(lin.support_points[ent].x + 2 * lin.support_points[ent].y));

    CHECK_THROWS_AS(build_dofmap(m, {2, 2}, Domain::Fluid, {BoundaryTag::Interface}),
                    std::invalid_argument);

    // a whole-domain map spans both subdomains, interface entities shared
    const DofMap both = build_dofmap(m, {1, 1}, Domain::Both, {});
    CHECK(both.n_dofs() == static_cast<int>(m.nodes.size()));
    CHECK(both.tri_ids.size() == m.triangles.size());
    CHECK_NOTHROW(build_dofmap(m, {2, 2}, Domain::Dual,
                               {BoundaryTag::GammaD, BoundaryTag::Interface}, {}, true));
}

TEST_CASE("interpolation") {
    const Mesh m = build_two_domain_mesh(2, 2);
    const DofMap p1 = build_dofmap(m, {1, 1}, Domain::Dual, {});
    const FeFunction ones = interpolate([](Vec2, int) { return 1.0; }, p1);
    for (int d = 0; d < p1.n_dofs(); ++d)
        CHECK(ones.coeffs[d] == 1.0);

    const DofMap p2 = build_dofmap(m, {2, 1}, Domain::Fluid, {});
    const FeFunction lin = interpolate([](Vec2 p, int) { return p.x + p.y; }, p2);
    Rng rng(5);
    for (int t : p2.tri_ids)
        for (int s = 0; s < 3; ++s) {
            double l[3] = {rng.uniform01(), rng.uniform01(), 0};
            const double sum = l[0] + l[1];
            if (sum > 1) {
                l[0] /= sum;
                l[1] /= sum;
            }
            l[2] = 1 - l[0] - l[1];
            const TriGeom g = tri_geom(m, t);
            const Vec2 p = l[0] * g.p[0] + l[1] * g.p[1] + l[2] * g.p[2];
            CHECK(eval_scalar(lin, t, l) == doctest::Approx(p.x + p.y).epsilon(1e-13));
        }
}

TEST_CASE("interpolation converges at third order for P2") {
    Mesh m = build_two_domain_mesh(2, 2);
    auto f = [](Vec2 p, int) { return std::sin(kPi * p.x) * std::sin(kPi * p.y); };
    std::vector<double> errs;
    for (int lev = 0; lev < 4; ++lev) {
        const DofMap p2 = build_dofmap(m, {2, 1}, Domain::Dual, {});
        const FeFunction fh = interpolate(f, p2);
        // L2 error by quadrature against the exact field
        const TriangleRule& rule = triangle_rule_degree5();
        double acc = 0;
        for (int t : p2.tri_ids) {
            const TriGeom g = tri_geom(m, t);
            for (std::size_t q = 0; q < rule.points.size(); ++q) {
                const double* l = rule.points[q].data();
                const Vec2 p = l[0] * g.p[0] + l[1] * g.p[1] + l[2] * g.p[2];
                const double d = eval_scalar(fh, t, l) - f(p, 0);
                acc += rule.weights[q] * 2.0 * g.area * d * d;
            }
        }
        errs.push_back(std::sqrt(acc));
        if (lev < 3)
            m = refine_uniform(m);
    }
    for (std::size_t i = 1; i < errs.size(); ++i) {
        const double order = std::log2(errs[i - 1] / errs[i]);
        CHECK(order >= 2.8);
    }
}

TEST_CASE("norms") {
    const Mesh m = build_two_domain_mesh(3, 3);

    const DofMap p1d = build_dofmap(m, {1, 1}, Domain::Dual, {});
    const FeFunction zero = zero_function(p1d);
    CHECK(norms(zero, NormKind::L2) == 0.0);
    CHECK(norms(zero, NormKind::H1semi) == 0.0);

    const FeFunction fx = interpolate([](Vec2 p, int) { return p.x; }, p1d);
    CHECK(norms(fx, NormKind::H1semi) == doctest::Approx(1.0).epsilon(1e-13));

    const DofMap p2v = build_dofmap(m, {2, 2}, Domain::Fluid, {});
    const FeFunction shear =
        interpolate([](Vec2 p, int c) { return c == 0 ? p.y : 0.0; }, p2v);
    CHECK(norms(shear, NormKind::Dseminorm) ==
          doctest::Approx(std::sqrt(0.5)).epsilon(1e-13));

    // scalar fields reject the symmetric-gradient seminorm
    CHECK_THROWS_AS(norms(fx, NormKind::Dseminorm), std::invalid_argument);

    // interface norms: u = (1,0) trace has |Gamma| mass
    const FeFunction ones =
        interpolate([](Vec2, int c) { return c == 0 ? 1.0 : 0.0; }, p2v);
    CHECK(norms(ones, NormKind::L2Gamma) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(norms(ones, NormKind::L4Gamma) == doctest::Approx(1.0).epsilon(1e-13));

    // a mesh whose interface tags were stripped cannot evaluate them
    Mesh stripped = m;
    std::erase_if(stripped.boundary_edges,
                  [](const BoundaryEdge& e) { return e.tag == BoundaryTag::Interface; });
    const DofMap broken = build_dofmap(stripped, {2, 2}, Domain::Fluid, {});
    const FeFunction g = interpolate([](Vec2, int) { return 1.0; }, broken);
    CHECK_THROWS_AS(norms(g, NormKind::L2Gamma), std::invalid_argument);
}

TEST_CASE("empirical Korn, Poincare and trace constants are stable") {
    const Mesh m1 = build_two_domain_mesh(4, 4);
    const Mesh m2 = build_two_domain_mesh(8, 8);

    const DofMap v1 = build_dofmap(m1, {2, 2}, Domain::Fluid, {BoundaryTag::GammaS});
    const DofMap v2 = build_dofmap(m2, {2, 2}, Domain::Fluid, {BoundaryTag::GammaS});
    const double k1 = korn_constant(v1, 100, 11);
    const double k2 = korn_constant(v2, 100, 11);
    CHECK(k1 > 0);
    CHECK(std::abs(k2 - k1) / k1 <= 0.2);

    const DofMap d1 = build_dofmap(m1, {2, 1}, Domain::Dual, {BoundaryTag::GammaD});
    const DofMap d2 = build_dofmap(m2, {2, 1}, Domain::Dual, {BoundaryTag::GammaD});
    const double p1 = poincare_constant(d1, 100, 13);
    const double p2 = poincare_constant(d2, 100, 13);
    CHECK(p1 > 0);
    CHECK(std::abs(p2 - p1) / p1 <= 0.2);

    const double t1 = trace_constant(v1, 100, 17);
    const double t2 = trace_constant(v2, 100, 17);
    CHECK(t1 > 0);
    CHECK(std::abs(t2 - t1) / t1 <= 0.2);
}
