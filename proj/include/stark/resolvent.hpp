// Cluster expansion of the resolvent: decomposition chains, the operators
// I(z) and D(z), the identity G = D + I G and compactness/Fredholm probes.

#pragma once

#include <complex>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stark/model.hpp"
#include "stark/partition.hpp"

namespace stark {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

struct DecompositionChain {
    std::vector<ClusterDecomposition> sequence;  // finest first, strictly coarsening

    int k_S() const { return sequence.back().block_count(); }
    // Every step merges exactly two clusters, i.e. the chain is generated by
    // adding one connecting edge at a time.
    bool realizable() const;
    std::string to_string() const;
};

enum class ChainTerminal { connected_only, disconnected_only, all };

std::vector<DecompositionChain> enumerate_chains(int n, ChainTerminal terminal);

// Pairs intra-cluster in `coarse` but inter-cluster in `fine`.
std::vector<std::pair<int, int>> coupling_pairs(const ClusterDecomposition& fine, const ClusterDecomposition& coarse);

OperatorMatrix inter_cluster_coupling(const ClusterDecomposition& fine, const ClusterDecomposition& coarse,
                                      const ModelParams& params, const Window& window, Basis basis = Basis::stark);

struct ResolventBlock {
    ComplexMatrix G;
    double residual = 0.0;  // max |(z - H_D) G - 1|
    double rcond = 0.0;
};

// (z - H_D)^{-1} by a dense LU solve; rejected when the condition estimate exceeds 1e12.
ResolventBlock cluster_resolvent(const ClusterDecomposition& D, Complex z, const ModelParams& params,
                                 const Window& window, Basis basis = Basis::stark);

// Caches G_D(z) and the couplings for one (z, params, window).
class ResolventProbe {
public:
    ResolventProbe(Complex z, ModelParams params, Window window, Basis basis = Basis::stark);

    Complex z() const noexcept { return z_; }
    const ResolventBlock& resolvent(const ClusterDecomposition& D);
    const SparseMatrix& coupling(const ClusterDecomposition& fine, const ClusterDecomposition& coarse);
    // Full resolvent (z - H)^{-1}.
    const ResolventBlock& full();
    double worst_solver_residual() const;

    // G_{D_N} V G_{D_{N-1}} ... for one chain; `trailing` appends G_{D_k}.
    ComplexMatrix chain_product(const DecompositionChain& chain, bool trailing);

    const ModelParams& params() const noexcept { return params_; }
    const Window& window() const noexcept { return window_; }

private:
    Complex z_;
    ModelParams params_;
    Window window_;
    Basis basis_;
    std::map<std::string, ResolventBlock> resolvents_;
    std::map<std::string, SparseMatrix> couplings_;
};

ComplexMatrix build_I(ResolventProbe& probe);
ComplexMatrix build_D(ResolventProbe& probe);
ComplexMatrix build_I(Complex z, const ModelParams& params, const Window& window);
ComplexMatrix build_D(Complex z, const ModelParams& params, const Window& window);

// Largest singular value estimated by power iteration on A^* A from the
// normalized all-ones vector.
double power_norm(const ComplexMatrix& A, int steps = 30);
// Largest singular value from a full SVD.
double exact_norm(const ComplexMatrix& A);

struct FunctionalEquationReport {
    Complex z;
    double residual = 0.0;         // ||G - D - I G|| (power iteration)
    double norm_I = 0.0;
    double norm_D = 0.0;
    double norm_G = 0.0;
    double solver_residual = 0.0;  // worst (z - H_D) G_D - 1 over all solves
    int connected_chains = 0;
    int disconnected_chains = 0;
};

FunctionalEquationReport functional_equation_residual(Complex z, const ModelParams& params, const Window& window);

struct CompactnessReport {
    Eigen::VectorXd singular_values;
    long k_threshold = -1;  // one-based smallest k with s_k <= ratio s_1; -1 if none
    double ratio = 1e-6;
    bool passed = false;    // such k exists below dimension / 2
};

CompactnessReport compactness_proxy(const ComplexMatrix& I, double ratio = 1e-6);

struct FredholmPoint {
    Complex z;
    Complex nearest_to_one;       // eigenvalue of I(z) closest to 1
    double proximity = 0.0;       // |mu - 1|
    double nearest_h_eigenvalue = 0.0;
    double distance_to_h = 0.0;   // |Re z - nearest eigenvalue|, real z only
    bool flagged = false;
    bool consistent = true;       // flagged real z lie within 1e-2 of sigma(H)
};

struct FredholmReport {
    std::vector<FredholmPoint> points;
    int flagged = 0;
    bool passed = true;
};

FredholmReport fredholm_probe(const std::vector<Complex>& z_grid, const ModelParams& params, const Window& window,
                              double threshold = 1e-3, double match_tol = 1e-2);

}  // namespace stark
