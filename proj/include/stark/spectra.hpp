// Diagonalization of truncated operators, cluster spectra and the 2hN shift check.

#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stark/model.hpp"
#include "stark/partition.hpp"

namespace stark {

inline constexpr std::size_t kDenseCap = 6000;
inline constexpr double kInteriorMassTol = 1e-8;
inline constexpr double kClusterDedupTol = 1e-8;

struct SpectralResult {
    Basis basis = Basis::position;
    Window window;
    IndexMap index_map;
    Eigen::VectorXd eigenvalues;   // ascending
    Eigen::MatrixXd eigenvectors;  // orthonormal columns
    double residual_max = 0.0;
    double norm_estimate = 0.0;
    double gram_deviation = 0.0;
    Eigen::VectorXd boundary_mass;
    bool converged = true;

    // Columns whose mass within interior_margin of a window face is <= tol.
    std::vector<Eigen::Index> interior(double tol = kInteriorMassTol) const;
    std::vector<double> interior_eigenvalues(double tol = kInteriorMassTol) const;
};

// Full dense decomposition; dimension must not exceed dense_cap.
SpectralResult eigh(const OperatorMatrix& H, std::size_t dense_cap = kDenseCap);

enum class Which { lowest, highest, nearest };

// k eigenpairs by Lanczos with full reorthogonalization. `nearest` works on the
// shift-inverted operator (H - target)^{-1}.
SpectralResult extremal_eigs(const OperatorMatrix& H, int k, Which which, double target = 0.0,
                             int max_iterations = 3000);

struct ClusterPoint {
    double value = 0.0;
    std::vector<int> partition;
};

struct ClusterSpectrum {
    std::vector<ClusterPoint> points;  // ascending, deduplicated
    std::map<int, Window> windows;     // window used for each part size

    std::vector<double> values() const;
};

// Union over integer partitions of N (excluding N itself) of Minkowski sums of
// interior spectra of H^(p). Part sizes without an entry in depth_windows use `window`.
ClusterSpectrum cluster_spectrum(const ModelParams& params, const Window& window,
                                 const std::map<int, Window>& depth_windows, Basis basis = Basis::stark);

double dist_to_cluster(double lambda, const ClusterSpectrum& sigma);

struct PeriodicityReport {
    double shift = 0.0;
    double max_distance = 0.0;
    double worst_eigenvalue = 0.0;
    std::size_t compared = 0;
    bool passed = false;
};

// For every interior eigenvalue e whose shifted value e + shift lies inside the
// interior energy band, the distance from e + shift to the truncated spectrum.
PeriodicityReport spectral_periodicity_check(const SpectralResult& result, double shift, double tol = 1e-6);

// Distance from `value` to the nearest entry of an ascending vector.
double nearest_distance(double value, const Eigen::VectorXd& sorted);
double nearest_distance(double value, const std::vector<double>& sorted);

}  // namespace stark
