#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace misscov {

// Finite stand-in for the unit sphere: all basis vectors e_i, all
// (e_i +/- e_j)/sqrt(2) for i < j, plus seeded uniform extras. The structured
// part alone identifies a symmetric matrix from its quadratic forms.
struct DirectionNet {
  std::size_t dim = 0;
  std::size_t count = 0;
  std::vector<double> vectors;  // count*dim row-major
  bool includes_zero = false;   // consulted only by the operator-norm profile
  std::uint64_t seed = 0;

  std::span<const double> vec(std::size_t k) const { return {vectors.data() + k * dim, dim}; }

  DirectionNet with_zero() const {
    DirectionNet copy = *this;
    copy.includes_zero = true;
    return copy;
  }

  std::size_t structured_count() const { return dim * dim; }  // d + d(d-1)
};

std::size_t default_extra_random(std::size_t d);  // min(50*d, 5000)

DirectionNet build_net(std::size_t d, std::size_t extra_random, std::uint64_t seed);

struct SupResult {
  double value = 0.0;
  std::size_t index = 0;  // first attaining direction in net order
};

// max over the net of |f(v)|; throws if f returns a non-finite value.
SupResult sup_abs_over_net(const DirectionNet& net,
                           const std::function<double(std::span<const double>)>& f);

}  // namespace misscov
