#include "dpns/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace dpns {

const TriangleRule& triangle_rule_degree2() {
    static const TriangleRule rule = [] {
        TriangleRule r;
        r.exactness = 2;
        const double w = 1.0 / 6.0;
        r.points = {{{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0}},
                    {{1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0}},
                    {{1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}}};
        r.weights = {w, w, w};
        return r;
    }();
    return rule;
}

const TriangleRule& triangle_rule_degree5() {
    static const TriangleRule rule = [] {
        TriangleRule r;
        r.exactness = 5;
        const double s15 = std::sqrt(15.0);
        const double a1 = (6.0 + s15) / 21.0;
        const double a2 = (6.0 - s15) / 21.0;
        const double w0 = 9.0 / 80.0;                 // centroid
        const double w1 = (155.0 + s15) / 2400.0;     // group with a1
        const double w2 = (155.0 - s15) / 2400.0;     // group with a2
        auto push = [&r](double l1, double l2, double w) {
            r.points.push_back({l1, l2, 1.0 - l1 - l2});
            r.weights.push_back(w);
        };
        push(1.0 / 3.0, 1.0 / 3.0, w0);
        push(a1, a1, w1);
        push(a1, 1.0 - 2.0 * a1, w1);
        push(1.0 - 2.0 * a1, a1, w1);
        push(a2, a2, w2);
        push(a2, 1.0 - 2.0 * a2, w2);
        push(1.0 - 2.0 * a2, a2, w2);
        return r;
    }();
    return rule;
}

const EdgeRule& edge_rule_gauss(int npoints) {
    static const EdgeRule g2 = [] {
        EdgeRule r;
        r.exactness = 3;
        const double d = 0.5 / std::sqrt(3.0);
        r.points = {0.5 - d, 0.5 + d};
        r.weights = {0.5, 0.5};
        return r;
    }();
    static const EdgeRule g3 = [] {
        EdgeRule r;
        r.exactness = 5;
        const double d = 0.5 * std::sqrt(3.0 / 5.0);
        r.points = {0.5 - d, 0.5, 0.5 + d};
        r.weights = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
        return r;
    }();
    static const EdgeRule g4 = [] {
        EdgeRule r;
        r.exactness = 7;
        const double p1 = 0.3399810435848563;
        const double p2 = 0.8611363115940526;
        const double w1 = 0.6521451548625461 / 2.0;
        const double w2 = 0.3478548451374538 / 2.0;
        r.points = {0.5 - 0.5 * p2, 0.5 - 0.5 * p1, 0.5 + 0.5 * p1, 0.5 + 0.5 * p2};
        r.weights = {w2, w1, w1, w2};
        return r;
    }();
    static const EdgeRule g5 = [] {
        EdgeRule r;
        r.exactness = 9;
        const double p1 = 0.5384693101056831;
        const double p2 = 0.9061798459386640;
        const double w0 = 0.5688888888888889 / 2.0;
        const double w1 = 0.4786286704993665 / 2.0;
        const double w2 = 0.2369268850561891 / 2.0;
        r.points = {0.5 - 0.5 * p2, 0.5 - 0.5 * p1, 0.5, 0.5 + 0.5 * p1, 0.5 + 0.5 * p2};
        r.weights = {w2, w1, w0, w1, w2};
        return r;
    }();
    switch (npoints) {
    case 2: return g2;
    case 3: return g3;
    case 4: return g4;
    case 5: return g5;
    default: throw std::invalid_argument("edge_rule_gauss: npoints must be 2..5");
    }
}

} // namespace dpns
