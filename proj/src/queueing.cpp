#include "streamcap/queueing.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "streamcap/kernels.hpp"

namespace streamcap {

namespace {

constexpr double kUnitDiskSlack = 1e-10;

using Triplet = Eigen::Triplet<double>;

// Shared row assembly for the chain Q' = min(B, max(S_eff,Q) - S_eff + A) with
// S_eff = S + Bernoulli(x); x = 0 is the plain integer-service chain.
void for_each_entry(const ArrivalPmf& a, int S, double x, int64_t B, int64_t i,
                    auto&& emit) {
    const int amax = a.max_arrivals();
    for (int xi = 0; xi <= (x > 0.0 ? 1 : 0); ++xi) {
        const double w = xi ? x : 1.0 - x;
        if (w == 0.0) continue;
        const int64_t base = std::max<int64_t>(0, i - (S + xi));
        double tail = 0.0;
        for (int k = 0; k <= amax; ++k) {
            const double p = a.probs[k];
            if (p == 0.0) continue;
            const int64_t dest = base + k;
            if (dest >= B)
                tail += w * p;
            else
                emit(dest, w * p);
        }
        if (tail > 0.0) emit(B, tail);
    }
}

FiniteBufferDist finish_dist(std::vector<double> probs, int S, double x) {
    FiniteBufferDist dist;
    dist.probs = std::move(probs);
    for (double& p : dist.probs)
        if (p < 0.0 && p > -1e-12) p = 0.0;
    double beta = 0.0;
    if (x == 0.0) {
        beta = S;
        for (int i = 0; i < S; ++i) beta -= (S - i) * dist.probs[i];
    } else {
        for (std::size_t i = 0; i < dist.probs.size(); ++i)
            beta += dist.probs[i] * ((1.0 - x) * std::min<double>(static_cast<double>(i), S) +
                                     x * std::min<double>(static_cast<double>(i), S + 1));
    }
    dist.served_mean = beta;
    return dist;
}

FiniteBufferDist steady_state(const ArrivalPmf& arrivals, int S, double x, int64_t B) {
    arrivals.validate();
    const int64_t ceil_service = S + (x > 0.0 ? 1 : 0);
    if (B <= ceil_service) throw std::invalid_argument("buffer must exceed service batch");
    if (arrivals.probs[0] >= 1.0) throw std::runtime_error("chain not irreducible");

    int atoms = 0;
    int64_t atom = 0;
    for (std::size_t k = 0; k < arrivals.probs.size(); ++k)
        if (arrivals.probs[k] > 0.0) {
            ++atoms;
            atom = static_cast<int64_t>(k);
        }
    if (atoms == 1) {
        // deterministic arrivals make whole state ranges absorbing, so the
        // stationary distribution is not unique; started from an empty queue
        // the chain locks at the atom when it is servable, else at the cap
        std::vector<double> probs(static_cast<std::size_t>(B) + 1, 0.0);
        probs[static_cast<std::size_t>(atom <= S ? atom : B)] = 1.0;
        return finish_dist(std::move(probs), S, x);
    }

    const int64_t n = B + 1;
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(n) * (arrivals.probs.size() + 2));
    for (int64_t i = 0; i < n; ++i) {
        // column i of (Psi^T - I); the normalization row B is written separately
        for_each_entry(arrivals, S, x, B, i, [&](int64_t dest, double p) {
            if (dest != B) trips.emplace_back(static_cast<int>(dest), static_cast<int>(i), p);
        });
        if (i != B) trips.emplace_back(static_cast<int>(i), static_cast<int>(i), -1.0);
    }
    for (int64_t c = 0; c < n; ++c)
        trips.emplace_back(static_cast<int>(B), static_cast<int>(c), 1.0);

    Eigen::SparseMatrix<double> M(n, n);
    M.setFromTriplets(trips.begin(), trips.end());
    M.makeCompressed();

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(M);
    lu.factorize(M);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("chain not irreducible");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs[n - 1] = 1.0;
    Eigen::VectorXd q = lu.solve(rhs);

    // residual of the balance equations, computed against the raw chain
    double resid = 0.0;
    std::vector<double> back(n, 0.0);
    for (int64_t i = 0; i < n; ++i)
        for_each_entry(arrivals, S, x, B, i,
                       [&](int64_t dest, double p) { back[dest] += q[i] * p; });
    for (int64_t i = 0; i < n; ++i) resid = std::max(resid, std::abs(back[i] - q[i]));
    if (resid > 1e-10) throw std::runtime_error("steady-state residual too large");

    return finish_dist(std::vector<double>(q.data(), q.data() + n), S, x);
}

// complex Horner for p(z) = z^S - A(z)
std::complex<double> eval_poly(const std::vector<double>& coeffs,
                               std::complex<double> z) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * z + coeffs[k];
    return acc;
}

std::complex<double> eval_poly_deriv(const std::vector<double>& coeffs,
                                     std::complex<double> z) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t k = coeffs.size(); k-- > 1;)
        acc = acc * z + static_cast<double>(k) * coeffs[k];
    return acc;
}

}  // namespace

void ArrivalPmf::validate() const {
    if (probs.empty()) throw std::invalid_argument("arrival pmf: empty");
    double total = 0.0, m = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] < 0.0) throw std::invalid_argument("arrival pmf: negative probability");
        total += probs[i];
        m += static_cast<double>(i) * probs[i];
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("arrival pmf: probabilities must sum to 1");
    if (std::abs(m - mean) > 1e-9)
        throw std::invalid_argument("arrival pmf: stored mean out of sync");
}

ArrivalPmf ArrivalPmf::from_probs(std::vector<double> probs) {
    while (probs.size() > 1 && probs.back() == 0.0) probs.pop_back();
    ArrivalPmf pmf;
    pmf.probs = std::move(probs);
    for (std::size_t i = 0; i < pmf.probs.size(); ++i)
        pmf.mean += static_cast<double>(i) * pmf.probs[i];
    pmf.validate();
    return pmf;
}

void QueueModel::check_ergodic() const {
    arrivals.validate();
    if (service < 1) throw std::invalid_argument("service must be at least 1");
    bool below = false;
    for (int i = 0; i < service && i <= arrivals.max_arrivals(); ++i)
        if (arrivals.probs[i] > 0.0) below = true;
    if (!below)
        throw std::invalid_argument("queue model not ergodic: no arrival mass below S");
    double at_or_below = 0.0;
    for (int i = 0; i <= service && i <= arrivals.max_arrivals(); ++i)
        at_or_below += arrivals.probs[i];
    if (at_or_below >= 1.0 - 1e-12)
        throw std::invalid_argument("queue model not ergodic: arrivals never exceed S");
    if (utilization() >= 1.0)
        throw std::invalid_argument("queue model not ergodic: utilization at or above 1");
}

std::vector<std::complex<double>> find_roots(const ArrivalPmf& arrivals, int service) {
    QueueModel{arrivals, service, 0}.check_ergodic();
    if (service == 1) return {};

    const int amax = arrivals.max_arrivals();
    const int degree = std::max(service, amax);
    std::vector<double> c(static_cast<std::size_t>(degree) + 1, 0.0);
    for (int k = 0; k <= amax; ++k) c[k] -= arrivals.probs[k];
    c[service] += 1.0;
    while (c.size() > 1 && c.back() == 0.0) c.pop_back();
    const int d = static_cast<int>(c.size()) - 1;

    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(d, d);
    for (int i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < d; ++i) companion(i, d - 1) = -c[i] / c[d];
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw std::runtime_error("root count mismatch");

    std::vector<std::complex<double>> inside;
    for (int i = 0; i < d; ++i) {
        std::complex<double> z = es.eigenvalues()[i];
        for (int it = 0; it < 8; ++it) {
            const auto pv = eval_poly(c, z);
            if (std::abs(pv) < 1e-13) break;
            const auto dv = eval_poly_deriv(c, z);
            if (std::abs(dv) < 1e-300) break;
            z -= pv / dv;
        }
        const double r = std::abs(z);
        if (r < 1.0 - kUnitDiskSlack) {
            if (std::abs(eval_poly(c, z)) >= 1e-9)
                throw std::runtime_error("root count mismatch");
            inside.push_back(z);
        } else if (r <= 1.0 + kUnitDiskSlack && std::abs(z - 1.0) > 1e-8) {
            throw std::runtime_error(
                "root on the unit circle (periodic arrival pmf); perturb the pmf");
        }
    }
    if (static_cast<int>(inside.size()) != service - 1)
        throw std::runtime_error("root count mismatch");
    std::sort(inside.begin(), inside.end(), [](const auto& a, const auto& b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return inside;
}

InfiniteBufferBoundary solve_infinite(const ArrivalPmf& arrivals, int service) {
    const auto roots = find_roots(arrivals, service);
    const int S = service;

    // multiplicity grouping: repeated roots contribute derivative conditions
    std::vector<std::pair<std::complex<double>, int>> groups;
    for (const auto& z : roots) {
        if (!groups.empty() && std::abs(z - groups.back().first) < 1e-8)
            groups.back().second++;
        else
            groups.emplace_back(z, 1);
    }

    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(S, S);
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(S);
    int row = 0;
    for (const auto& [z, mult] : groups) {
        for (int order = 0; order < mult; ++order, ++row) {
            for (int i = 0; i < S; ++i) {
                std::complex<double> coeff(0.0, 0.0);
                for (int l = std::max(i, order); l <= S - 1; ++l) {
                    double falling = 1.0;
                    for (int f = 0; f < order; ++f) falling *= static_cast<double>(l - f);
                    coeff += falling * std::pow(z, l - order);
                }
                A(row, i) = coeff;
            }
            b(row) = 0.0;
        }
    }
    for (int i = 0; i < S; ++i) A(row, i) = static_cast<double>(S - i);
    b(row) = static_cast<double>(S) - arrivals.mean;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(A);
    if (qr.rank() < S) throw std::runtime_error("degenerate boundary system");
    const Eigen::VectorXcd q = qr.solve(b);

    InfiniteBufferBoundary out;
    out.roots = roots;
    out.n_one = static_cast<double>(S) - arrivals.mean;
    out.boundary_probs.resize(S);
    for (int i = 0; i < S; ++i) {
        if (std::abs(q[i].imag()) > 1e-8)
            throw std::runtime_error("degenerate boundary system");
        double v = q[i].real();
        if (v < -1e-8 || v >= 1.0) throw std::runtime_error("degenerate boundary system");
        out.boundary_probs[i] = std::max(0.0, v);
    }
    return out;
}

std::vector<double> TransitionMatrix::row(int64_t i) const {
    std::vector<double> r(static_cast<std::size_t>(buffer) + 1, 0.0);
    for_each_entry(arrivals, service, 0.0, buffer, i,
                   [&](int64_t dest, double p) { r[static_cast<std::size_t>(dest)] += p; });
    return r;
}

std::vector<std::vector<double>> TransitionMatrix::dense() const {
    if (buffer > 20000)
        throw std::invalid_argument("dense materialization limited to small buffers");
    std::vector<std::vector<double>> m;
    m.reserve(static_cast<std::size_t>(buffer) + 1);
    for (int64_t i = 0; i <= buffer; ++i) m.push_back(row(i));
    return m;
}

TransitionMatrix build_transition_matrix(const ArrivalPmf& arrivals, int service,
                                         int64_t buffer) {
    arrivals.validate();
    if (service < 1) throw std::invalid_argument("service must be at least 1");
    if (buffer <= service) throw std::invalid_argument("buffer must exceed service batch");
    return TransitionMatrix{arrivals, service, buffer};
}

FiniteBufferDist solve_finite(const ArrivalPmf& arrivals, int service, int64_t buffer) {
    if (service < 1) throw std::invalid_argument("service must be at least 1");
    return steady_state(arrivals, service, 0.0, buffer);
}

double outage_probability(const FiniteBufferDist& dist, int service) {
    const std::size_t upto =
        std::min<std::size_t>(static_cast<std::size_t>(service), dist.probs.size());
    return kernels::sum(dist.probs.data(), upto);
}

double drop_rate(const FiniteBufferDist& dist, const ArrivalPmf& arrivals) {
    if (arrivals.mean <= 0.0) throw std::runtime_error("no arrivals; drop rate undefined");
    double delta = 1.0 - dist.served_mean / arrivals.mean;
    if (delta < 0.0 || delta > 1.0) {
        const double excess = delta < 0.0 ? -delta : delta - 1.0;
        if (excess > 1e-9)
            std::cerr << "drop_rate: clamped value " << delta << " into [0,1]\n";
        delta = std::clamp(delta, 0.0, 1.0);
    }
    return delta;
}

FractionalSolution solve_finite_fractional(const ArrivalPmf& arrivals, double s_real,
                                           int64_t buffer) {
    if (s_real < 1.0) throw std::invalid_argument("service must be at least 1");
    const int S = static_cast<int>(std::floor(s_real));
    double x = s_real - S;
    if (x < 1e-12) x = 0.0;

    FractionalSolution sol;
    sol.s_real = s_real;
    sol.dist = steady_state(arrivals, S, x, buffer);
    sol.outage = outage_probability(sol.dist, S) +
                 (x > 0.0 ? x * sol.dist.probs[static_cast<std::size_t>(S)] : 0.0);
    sol.drop = drop_rate(sol.dist, arrivals);
    return sol;
}

}  // namespace streamcap
