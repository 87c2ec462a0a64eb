#include "gdm/mixture.hpp"

#include <algorithm>

namespace gdm {

Eigen::Index BoostSet::count() const {
  return static_cast<Eigen::Index>(std::count(members.begin(), members.end(), true));
}

MixtureStructure build_lambda(std::span<const int> supports, Eigen::Index cap) {
  Eigen::Index M = 1;
  for (int q : supports) {
    if (q < 1) throw std::invalid_argument("every block needs at least one support");
    if (M > cap / q)
      throw MixtureCapError("mixture count exceeds cap of " + std::to_string(cap) +
                            "; group coefficients into fewer blocks");
    M *= q;
  }
  MixtureStructure mix;
  mix.supports.assign(supports.begin(), supports.end());
  const auto K = static_cast<Eigen::Index>(supports.size());
  mix.lambda.resize(K, M);
  Eigen::Index stride = M;
  for (Eigen::Index k = 0; k < K; ++k) {
    stride /= supports[k];
    for (Eigen::Index m = 0; m < M; ++m)
      mix.lambda(k, m) = static_cast<int>((m / stride) % supports[k]) + 1;
  }
  return mix;
}

}  // namespace gdm
