// N-particle Stark Hamiltonians H = H0 + V on a truncated lattice window,
// in the position basis and in the Wannier-Stark (Bessel) basis.

#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "stark/partition.hpp"
#include "stark/specfun.hpp"

namespace stark {

inline constexpr int kDefaultNMax = 4;
inline constexpr std::size_t kDefaultNonzeroCap = std::size_t{1} << 24;
inline constexpr double kStarkDropTolerance = 1e-14;

enum class Basis { position, stark };
enum class Statistics { distinguishable, boson, fermion };
enum class PotentialKind { nearest_neighbor, exponential, power_law, tabulated };

std::string to_string(Basis b);
std::string to_string(Statistics s);
std::string to_string(PotentialKind k);
Basis parse_basis(const std::string& s);
Statistics parse_statistics(const std::string& s);
PotentialKind parse_potential_kind(const std::string& s);

// v : Z -> R. nearest_neighbor: U at |n| = 1; exponential: U e^{-kappa |n|};
// power_law: U / (1 + |n|)^p; tabulated: finite table, zero elsewhere.
struct PairPotential {
    PotentialKind kind = PotentialKind::nearest_neighbor;
    double U = 1.0;
    double decay = 1.0;
    std::map<long, double> table;

    double operator()(long n) const;
    double sup_norm() const;
    bool symmetric() const;
    // Smallest R with |v(n)| < tol for all |n| > R.
    long range(double tol) const;
    void validate() const;
};

struct ModelParams {
    double g = 1.0;
    double h = 0.5;
    int N = 2;
    PairPotential potential;
    Statistics statistics = Statistics::distinguishable;
    int n_max = kDefaultNMax;
    double h_min = kDefaultHMin;

    void validate() const;
    double ratio() const { return BesselArgument::from_ratio(g, h, h_min).value(); }
    // +1 for bosons, -1 for fermions, 0 for distinguishable particles.
    int eta() const;
};

struct Window {
    int L = 12;
    int interior_margin = 7;

    void validate() const;
    int side() const noexcept { return 2 * L + 1; }
};

// L >= 2 ceil|g/h| + 10 and margin >= ceil|g/h| + 5.
void require_adequate_window(const ModelParams& params, const Window& window);
bool window_is_adequate(const ModelParams& params, const Window& window);

// Lexicographic bijection between flat indices and tuples in [-L, L]^N.
class IndexMap {
public:
    IndexMap() = default;
    IndexMap(int particles, int L);

    int particles() const noexcept { return n_; }
    int L() const noexcept { return L_; }
    int side() const noexcept { return 2 * L_ + 1; }
    std::size_t size() const noexcept { return size_; }

    std::size_t flat(const std::vector<int>& tuple) const;
    std::vector<int> tuple(std::size_t flat) const;
    void tuple_into(std::size_t flat, int* out) const;
    // Stride of coordinate i in the flat index.
    std::size_t stride(int i) const { return strides_[static_cast<std::size_t>(i)]; }

    // Some coordinate lies within `margin` of the window face.
    bool near_boundary(std::size_t flat, int margin) const;

private:
    int n_ = 0;
    int L_ = 0;
    std::size_t size_ = 0;
    std::vector<std::size_t> strides_;
};

using SparseMatrix = Eigen::SparseMatrix<double>;

struct OperatorMatrix {
    Basis basis = Basis::position;
    Window window;
    IndexMap index_map;
    SparseMatrix matrix;

    std::size_t dimension() const noexcept { return index_map.size(); }
    Eigen::MatrixXd dense() const { return Eigen::MatrixXd(matrix); }
    double asymmetry() const;
};

// Squared norm of psi on tuples within `margin` of the window face.
double boundary_mass(const Eigen::Ref<const Eigen::VectorXd>& psi, const IndexMap& map, int margin);
double boundary_mass(const Eigen::Ref<const Eigen::VectorXcd>& psi, const IndexMap& map, int margin);

OperatorMatrix build_h0(const ModelParams& params, const Window& window, Basis basis,
                        std::size_t nonzero_cap = kDefaultNonzeroCap);

double pair_element_stark(long n1, long n2, long m1, long m2, const ModelParams& params, const Window& window);

// Two-particle Stark kernel K[(n1,n2),(m1,m2)], flat pair index (n1+L)(2L+1) + (n2+L).
Eigen::MatrixXd stark_pair_kernel(const ModelParams& params, const Window& window);

// Sum of V_alpha over the given particle pairs.
OperatorMatrix build_pair_interaction(const ModelParams& params, const Window& window, Basis basis,
                                      const std::vector<std::pair<int, int>>& pairs,
                                      std::size_t nonzero_cap = kDefaultNonzeroCap);
OperatorMatrix build_interaction(const ModelParams& params, const Window& window, Basis basis,
                                 std::size_t nonzero_cap = kDefaultNonzeroCap);
OperatorMatrix build_hamiltonian(const ModelParams& params, const Window& window, Basis basis,
                                 std::size_t nonzero_cap = kDefaultNonzeroCap);
OperatorMatrix build_cluster_hamiltonian(const ModelParams& params, const Window& window,
                                         const ClusterDecomposition& decomposition, Basis basis,
                                         std::size_t nonzero_cap = kDefaultNonzeroCap);

// (1/N!) sum_pi eta^{sign pi} Pi_pi with eta = +1 or -1.
OperatorMatrix symmetrizer(int particles, const Window& window, int eta, Basis basis = Basis::position);

std::vector<std::pair<int, int>> all_pairs(int particles);

struct EnvelopeValue {
    double value = 0.0;
    // |f from (0,-n)  -  f from (5,5-n)|
    double translation_discrepancy = 0.0;
};

// f(n) = sum_{j1,j2} |v(j1-j2)| |J_{m1-j1} J_{m2-j2}| with m1 - m2 = n.
EnvelopeValue interaction_envelope_f(long n, const ModelParams& params, int tail);

// Single-particle basis matrix xi(j, m) = J_{m-j}(g/h), j, m in [-L, L].
struct StarkBasis {
    double x = 0.0;
    int L = 0;
    Eigen::MatrixXd xi;

    static StarkBasis build(const ModelParams& params, int L);
};

// Applies the single-particle matrix M along every coordinate of a tensor-product vector.
Eigen::VectorXcd apply_per_particle(const Eigen::MatrixXd& M, const Eigen::VectorXcd& psi, const IndexMap& map);
Eigen::VectorXd apply_per_particle(const Eigen::MatrixXd& M, const Eigen::VectorXd& psi, const IndexMap& map);

}  // namespace stark
