#pragma once

#include <treatfair/scm.hpp>

#include <cmath>
#include <functional>

namespace toy {

using namespace treatfair;
using V = std::span<const double>;
using Fn = std::function<double(V)>;

template <class... F>
std::vector<NoiseSpec> noises(F... f) {
  return {NoiseSpec(f)...};
}

// value = mean(parents) + u, invertible in closed form
inline Mechanism additive(std::size_t node, std::vector<std::size_t> parents, Fn mean, std::string text = "") {
  return {node, std::move(parents),
          ClosedForm{[mean](V v, double u) { return mean(v) + u; }, [mean](V v, double x) { return x - mean(v); },
                     std::move(text)}};
}

// binary root drawn from Bernoulli noise
inline Mechanism binary_root(std::size_t node) {
  return {node, {}, ClosedForm{[](V, double u) { return u - 0.5; }, [](V, double t) { return t + 0.5; }, "U"}};
}

// binary node: 1 iff score(parents) + u >= 0
inline Mechanism threshold(std::size_t node, std::vector<std::size_t> parents, Fn score) {
  return {node, std::move(parents), ClosedForm{[score](V v, double u) { return score(v) + u; }, {}, "1{score+U>=0}"}};
}

inline FeatureSchema sxzy_schema() {
  return FeatureSchema({{"S", Role::sensitive, ColumnType::binary(), {"F", "M"}},
                        {"X", Role::covariate, ColumnType::continuous(), {}},
                        {"Z", Role::treatment, ColumnType::continuous(), {}},
                        {"Y", Role::outcome, ColumnType::binary(), {}}});
}

// S -> X -> Z with Z = zs*(1-S) + zx*X + U_z, Y = 1{Z + U_y >= 0} (or ignoring Z).
struct ChainParams {
  double xs = 1.0;   // X = xs*S + U_x
  double zs = 2.0;   // direct S -> Z coefficient on (1 - S)
  double zx = 1.0;
  double yz = 1.0;   // Y latent weight on Z
  double ys = 0.0;   // Y latent weight on S
  bool y_noise = true;
};

inline Scm chain(const ChainParams& p = {}) {
  std::vector<Mechanism> m;
  m.push_back(binary_root(0));
  m.push_back(additive(1, {0}, [p](V v) { return p.xs * v[0]; }));
  m.push_back(additive(2, {0, 1}, [p](V v) { return p.zs * (1.0 - v[0]) + p.zx * v[1]; }));
  m.push_back(threshold(3, {0, 2}, [p](V v) { return p.yz * v[2] + p.ys * v[0] - 0.5; }));
  auto n = noises(Bernoulli{0.5}, Gaussian{0.0, 1.0}, Gaussian{0.0, 1.0},
                  p.y_noise ? NoiseSpec(Logistic{0.0, 1.0}) : NoiseSpec(PointMass{0.0}));
  return Scm(sxzy_schema(), std::move(m), std::move(n));
}

// Three-valued sensitive column S in {0,1,2}; Z = shift[S] + U_z.
inline Scm three_valued(std::array<double, 3> shift, bool y_depends_on_z = true) {
  FeatureSchema schema({{"S", Role::sensitive, ColumnType::categorical(3), {}},
                        {"X", Role::covariate, ColumnType::continuous(), {}},
                        {"Z", Role::treatment, ColumnType::continuous(), {}},
                        {"Y", Role::outcome, ColumnType::binary(), {}}});
  std::vector<Mechanism> m;
  m.push_back({0, {}, ClosedForm{[](V, double u) { return u; }, [](V, double t) { return t; }, "S = U"}});
  m.push_back(additive(1, {}, [](V) { return 0.0; }));
  m.push_back(additive(2, {0}, [shift](V v) { return shift[static_cast<std::size_t>(v[0])]; }));
  m.push_back(threshold(3, {1, 2}, [y_depends_on_z](V v) { return y_depends_on_z ? v[2] - 2.5 : v[1]; }));
  auto n = noises(Categorical{{1.0 / 3, 1.0 / 3, 1.0 / 3}}, Gaussian{0.0, 1.0}, PointMass{0.0}, PointMass{0.0});
  return Scm(std::move(schema), std::move(m), std::move(n));
}

}  // namespace toy
