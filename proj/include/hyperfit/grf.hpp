#ifndef HYPERFIT_GRF_HPP
#define HYPERFIT_GRF_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "hyperfit/mesh.hpp"

namespace hyperfit {

// Matern (nu = 1) random field on the mesh via the SPDE approach: solve
// (gamma K + delta M + sqrt(delta gamma)/1.42 Mb) g = W with delta = 1 and
// gamma = corr_len^2, then rescale to unit variance times amplitude.
Eigen::VectorXd grf_field(const Mesh2D& mesh, double corr_len, double amplitude,
                          std::uint64_t seed);

// Two independent components interleaved as (ux, uy) nodal noise.
Eigen::VectorXd grf_noise(const Mesh2D& mesh, double corr_len, double amplitude,
                          std::uint64_t seed);

// Correlation length recovered from realizations by fitting the nu = 1
// Matern correlation (d/l) K1(d/l) to binned pair correlations.
double estimate_corr_len(const Mesh2D& mesh,
                         const std::vector<Eigen::VectorXd>& fields);

}  // namespace hyperfit

#endif
