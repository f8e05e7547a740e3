#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

#include <Eigen/SparseLU>

#include "stark/spectra.hpp"

namespace stark {

namespace {

using Op = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

Eigen::VectorXd random_unit(Eigen::Index n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = dist(rng);
    return v.normalized();
}

// Ritz values/vectors of the operator, ranked so that the first k are wanted.
struct Krylov {
    Eigen::VectorXd theta;
    Eigen::MatrixXd vectors;
    double worst_estimate = 0.0;
};

Krylov lanczos(const Op& op, Eigen::Index n, int k, int max_steps, bool want_largest, double tol) {
    std::mt19937_64 rng(20240611ULL);
    Eigen::MatrixXd Q(n, max_steps);
    std::vector<double> alpha, beta;
    Q.col(0) = random_unit(n, rng);
    Krylov best;
    for (int j = 0; j < max_steps; ++j) {
        Eigen::VectorXd w = op(Q.col(j));
        const double a = Q.col(j).dot(w);
        alpha.push_back(a);
        w -= a * Q.col(j);
        if (j > 0) w -= beta.back() * Q.col(j - 1);
        for (int pass = 0; pass < 2; ++pass) w -= Q.leftCols(j + 1) * (Q.leftCols(j + 1).transpose() * w);
        double b = w.norm();

        const int m = j + 1;
        const bool last = m == max_steps;
        if (m >= k && (m % 10 == 0 || last || b < 1e-12)) {
            Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
            for (int i = 0; i < m; ++i) {
                T(i, i) = alpha[static_cast<std::size_t>(i)];
                if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[static_cast<std::size_t>(i)];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
            const Eigen::VectorXd& ev = es.eigenvalues();
            std::vector<int> order(static_cast<std::size_t>(m));
            for (int i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
            std::sort(order.begin(), order.end(), [&](int p, int q) {
                return want_largest ? ev(p) > ev(q) : ev(p) < ev(q);
            });
            Krylov cur;
            cur.theta.resize(k);
            Eigen::MatrixXd S(m, k);
            double scale = ev.cwiseAbs().maxCoeff();
            for (int i = 0; i < k; ++i) {
                const int c = order[static_cast<std::size_t>(i)];
                cur.theta(i) = ev(c);
                S.col(i) = es.eigenvectors().col(c);
                cur.worst_estimate = std::max(cur.worst_estimate, std::abs(b * es.eigenvectors()(m - 1, c)));
            }
            cur.vectors = Q.leftCols(m) * S;
            best = std::move(cur);
            if (best.worst_estimate <= tol * std::max(scale, 1.0) || last) return best;
        }
        if (last) break;
        if (b < 1e-12) {
            // Invariant subspace: continue from a fresh direction orthogonal to Q.
            Eigen::VectorXd r = random_unit(n, rng);
            for (int pass = 0; pass < 2; ++pass) r -= Q.leftCols(m) * (Q.leftCols(m).transpose() * r);
            if (r.norm() < 1e-12) return best;
            w = r.normalized();
            b = 0.0;
        } else {
            w /= b;
        }
        beta.push_back(b);
        Q.col(j + 1) = w;
    }
    return best;
}

}  // namespace

SpectralResult extremal_eigs(const OperatorMatrix& H, int k, Which which, double target, int max_iterations) {
    if (k < 1 || k > 64) throw std::invalid_argument("extremal_eigs: need 1 <= k <= 64");
    const auto n = static_cast<Eigen::Index>(H.dimension());
    if (k > n) throw std::invalid_argument("extremal_eigs: k exceeds dimension");
    if (H.asymmetry() > 1e-12) throw std::invalid_argument("extremal_eigs: matrix is not symmetric");

    SpectralResult r;
    r.basis = H.basis;
    r.window = H.window;
    r.index_map = H.index_map;

    const Eigen::Index memory_cap = std::max<Eigen::Index>(k + 1, 50000000 / std::max<Eigen::Index>(n, 1));
    const int steps = static_cast<int>(std::min<Eigen::Index>({n, max_iterations, memory_cap}));

    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    if (which == Which::nearest) {
        SparseMatrix shifted = H.matrix;
        SparseMatrix id(n, n);
        id.setIdentity();
        shifted -= target * id;
        Eigen::SparseLU<SparseMatrix> lu;
        lu.analyzePattern(shifted);
        lu.factorize(shifted);
        if (lu.info() != Eigen::Success) throw std::runtime_error("extremal_eigs: shift-invert factorization failed");
        Op op = [&lu](const Eigen::VectorXd& v) { Eigen::VectorXd y = lu.solve(v); return y; };
        // Largest |theta| of the inverse: take both ends and rank by magnitude.
        Krylov top = lanczos(op, n, std::min<Eigen::Index>(k, n), steps, true, 1e-12);
        Krylov bottom = lanczos(op, n, std::min<Eigen::Index>(k, n), steps, false, 1e-12);
        std::vector<std::pair<double, Eigen::VectorXd>> cand;
        for (int i = 0; i < top.theta.size(); ++i) cand.emplace_back(top.theta(i), top.vectors.col(i));
        for (int i = 0; i < bottom.theta.size(); ++i) cand.emplace_back(bottom.theta(i), bottom.vectors.col(i));
        std::stable_sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) { return std::abs(a.first) > std::abs(b.first); });
        std::vector<std::pair<double, Eigen::VectorXd>> picked;
        for (auto& c : cand) {
            const double lambda = target + 1.0 / c.first;
            bool dup = false;
            for (auto& p : picked) dup = dup || (std::abs(p.first - lambda) < 1e-10 && std::abs(p.second.dot(c.second)) > 0.5);
            if (!dup) picked.emplace_back(lambda, c.second);
            if (static_cast<int>(picked.size()) == k) break;
        }
        values.resize(static_cast<Eigen::Index>(picked.size()));
        vectors.resize(n, static_cast<Eigen::Index>(picked.size()));
        for (std::size_t i = 0; i < picked.size(); ++i) {
            values(static_cast<Eigen::Index>(i)) = picked[i].first;
            vectors.col(static_cast<Eigen::Index>(i)) = picked[i].second;
        }
    } else {
        Op op = [&H](const Eigen::VectorXd& v) { Eigen::VectorXd y = H.matrix * v; return y; };
        Krylov kr = lanczos(op, n, k, steps, which == Which::highest, 1e-13);
        values = kr.theta;
        vectors = kr.vectors;
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
    for (Eigen::Index i = 0; i < values.size(); ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return values(a) < values(b); });
    r.eigenvalues.resize(values.size());
    r.eigenvectors.resize(n, values.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        r.eigenvalues(static_cast<Eigen::Index>(i)) = values(order[i]);
        r.eigenvectors.col(static_cast<Eigen::Index>(i)) = vectors.col(order[i]).normalized();
    }
    const Eigen::MatrixXd R = H.matrix * r.eigenvectors - r.eigenvectors * r.eigenvalues.asDiagonal();
    r.residual_max = R.colwise().norm().maxCoeff();
    r.norm_estimate = r.eigenvalues.cwiseAbs().maxCoeff();
    const Eigen::MatrixXd G = r.eigenvectors.transpose() * r.eigenvectors;
    r.gram_deviation = (G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
    r.boundary_mass = Eigen::VectorXd::Zero(r.eigenvectors.cols());
    for (Eigen::Index c = 0; r.index_map.size() == static_cast<std::size_t>(n) && c < r.eigenvectors.cols(); ++c)
        r.boundary_mass(c) = boundary_mass(r.eigenvectors.col(c), r.index_map, r.window.interior_margin);
    r.converged = r.residual_max <= 1e-8;
    return r;
}

}  // namespace stark
