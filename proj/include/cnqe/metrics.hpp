// Trace distance, Helstrom discrimination, classification metrics, and the
// statistical tests used to compare run groups (Welch's t, Bonferroni,
// Pearson/Spearman correlations).

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "cnqe/embeddings.hpp"
#include "cnqe/nn.hpp"
#include "cnqe/qsim.hpp"

namespace cnqe::metrics {

using qsim::DensityMatrix;
using qsim::StateVector;

struct EnsemblePair {
    DensityMatrix rho_plus;
    DensityMatrix rho_minus;
    double q_plus = 0.5;
    double q_minus = 0.5;

    void check() const {
        if (rho_plus.dim() != rho_minus.dim()) throw std::invalid_argument("ensemble dimension mismatch");
        if (q_plus < 0 || q_minus < 0 || std::abs(q_plus + q_minus - 1.0) > 1e-12)
            throw std::invalid_argument("priors must be nonnegative and sum to 1");
    }
};

inline DensityMatrix mean_state(const std::vector<StateVector>& states) {
    if (states.empty()) throw std::invalid_argument("mean over empty state set");
    DensityMatrix acc(states.front().n_qubits);
    acc.entries = CMatrix(acc.dim(), acc.dim());
    for (const auto& s : states) {
        for (int i = 0; i < acc.dim(); ++i)
            for (int j = 0; j < acc.dim(); ++j)
                acc.entries(i, j) += s.amps[i] * std::conj(s.amps[j]);
    }
    acc.entries *= cdouble(1.0 / double(states.size()), 0.0);
    return acc;
}

// Mean embedded state over the images of one class.
inline DensityMatrix class_mean_state(const embed::EmbeddingSpec& spec, const nn::InterfaceModel& model,
                                      const std::vector<std::vector<double>>& images,
                                      const std::vector<int>& labels, int class_label) {
    if (images.size() != labels.size()) throw std::invalid_argument("images/labels length mismatch");
    std::vector<StateVector> states;
    nn::InterfaceWorkspace ws;
    for (size_t i = 0; i < images.size(); ++i) {
        if (labels[i] != class_label) continue;
        states.push_back(embed::embed_state(spec, model.forward(images[i], ws)));
    }
    if (states.empty()) throw std::invalid_argument("class has no members");
    return mean_state(states);
}

// Normalized trace distance (1/2)||rho - sigma||_1, in [0, 1].
inline double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim()) throw std::invalid_argument("trace distance dimension mismatch");
    const CMatrix diff = rho.entries - sigma.entries;
    double s = 0.0;
    for (double v : qsim::hermitian_eigenvalues(diff)) s += std::abs(v);
    return 0.5 * s;
}

inline double trace_distance(const EnsemblePair& pair) {
    pair.check();
    return trace_distance(pair.rho_plus, pair.rho_minus);
}

// Prior-weighted distance (1/2)||q+ rho+ - q- rho-||_1; at equal priors this
// is half the normalized value and is the quantity entering the Helstrom bound.
inline double trace_distance_weighted(const EnsemblePair& pair) {
    pair.check();
    CMatrix m = pair.rho_plus.entries * cdouble(pair.q_plus, 0.0);
    m -= pair.rho_minus.entries * cdouble(pair.q_minus, 0.0);
    double s = 0.0;
    for (double v : qsim::hermitian_eigenvalues(m)) s += std::abs(v);
    return 0.5 * s;
}

// Optimal discrimination accuracy 1/2 (1 + ||q+ rho+ - q- rho-||_1).
inline double helstrom_optimal_accuracy(const EnsemblePair& pair) {
    pair.check();
    CMatrix m = pair.rho_plus.entries * cdouble(pair.q_plus, 0.0);
    m -= pair.rho_minus.entries * cdouble(pair.q_minus, 0.0);
    double s = 0.0;
    for (double v : qsim::hermitian_eigenvalues(m)) s += std::abs(v);
    return 0.5 * (1.0 + s);
}

// Accuracy of the constructive POVM: project onto the positive eigenspace of
// q+ rho+ - q- rho-, guess plus there and minus elsewhere.
inline double helstrom_povm_accuracy(const EnsemblePair& pair) {
    pair.check();
    CMatrix m = pair.rho_plus.entries * cdouble(pair.q_plus, 0.0);
    m -= pair.rho_minus.entries * cdouble(pair.q_minus, 0.0);
    const auto eig = qsim::hermitian_eig(m);
    const int dim = m.rows();
    CMatrix proj(dim, dim);
    for (int k = 0; k < dim; ++k) {
        if (eig.values[k] <= 0.0) continue;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                proj(i, j) += eig.vectors(i, k) * std::conj(eig.vectors(j, k));
    }
    const double hit_plus = (proj * pair.rho_plus.entries).trace().real();
    const double hit_minus = 1.0 - (proj * pair.rho_minus.entries).trace().real();
    return pair.q_plus * hit_plus + pair.q_minus * hit_minus;
}

// ---------------------------------------------------------------------------
// Classification metrics.
// ---------------------------------------------------------------------------

struct ClassificationReport {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool zero_division = false;  // set when precision/recall/f1 had an empty denominator
};

inline ClassificationReport classification_report(const std::vector<int>& predictions,
                                                  const std::vector<int>& labels) {
    if (predictions.empty() || predictions.size() != labels.size())
        throw std::invalid_argument("classification_report needs equal nonempty inputs");
    size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (size_t i = 0; i < predictions.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) throw std::invalid_argument("labels must be 0 or 1");
        if (predictions[i] == 1 && labels[i] == 1) ++tp;
        else if (predictions[i] == 1) ++fp;
        else if (labels[i] == 1) ++fn;
        else ++tn;
    }
    ClassificationReport r;
    r.accuracy = double(tp + tn) / double(predictions.size());
    if (tp + fp == 0) {
        r.zero_division = true;
    } else {
        r.precision = double(tp) / double(tp + fp);
    }
    if (tp + fn == 0) {
        r.zero_division = true;
    } else {
        r.recall = double(tp) / double(tp + fn);
    }
    if (r.precision + r.recall > 0.0)
        r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    else
        r.zero_division = true;
    return r;
}

// ---------------------------------------------------------------------------
// Special functions for p-values: regularized incomplete beta via Lentz's
// continued fraction, relative accuracy ~1e-12.
// ---------------------------------------------------------------------------

namespace detail {

inline double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-14;
    constexpr double kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

inline double ibeta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double lbt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                       b * std::log(1.0 - x);
    const double bt = std::exp(lbt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

// Two-sided p-value of Student's t with `dof` degrees of freedom.
inline double t_two_sided_p(double t, double dof) {
    if (!std::isfinite(t)) return 0.0;
    const double x = dof / (dof + t * t);
    return ibeta(dof / 2.0, 0.5, x);
}

inline double sample_mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

inline double sample_var(const std::vector<double>& v, double mean) {
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s / double(v.size() - 1);
}

}  // namespace detail

struct WelchResult {
    double t = 0.0;
    double dof = 0.0;
    double p = 1.0;
};

inline WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("welch_t_test needs >= 2 samples each");
    const double ma = detail::sample_mean(a), mb = detail::sample_mean(b);
    const double va = detail::sample_var(a, ma), vb = detail::sample_var(b, mb);
    const double na = double(a.size()), nb = double(b.size());
    WelchResult r;
    const double se2 = va / na + vb / nb;
    if (se2 == 0.0) {
        // Degenerate: both samples constant. Equal means -> indistinguishable.
        r.dof = na + nb - 2.0;
        if (ma == mb) {
            r.t = 0.0;
            r.p = 1.0;
        } else {
            r.t = (ma > mb) ? std::numeric_limits<double>::infinity()
                            : -std::numeric_limits<double>::infinity();
            r.p = 0.0;
        }
        return r;
    }
    r.t = (ma - mb) / std::sqrt(se2);
    r.dof = se2 * se2 /
            ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
    r.p = detail::t_two_sided_p(r.t, r.dof);
    return r;
}

inline std::vector<double> bonferroni(const std::vector<double>& p_values, int m) {
    if (m < static_cast<int>(p_values.size()))
        throw std::invalid_argument("bonferroni m must cover the number of comparisons");
    std::vector<double> out(p_values.size());
    for (size_t i = 0; i < p_values.size(); ++i) out[i] = std::min(1.0, double(m) * p_values[i]);
    return out;
}

struct CorrelationResult {
    double pearson_r = 0.0;
    double pearson_p = 1.0;
    double spearman_rho = 0.0;
    double spearman_p = 1.0;
};

namespace detail {

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double mx = sample_mean(x), my = sample_mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) throw std::invalid_argument("correlation of a constant input");
    return sxy / std::sqrt(sxx * syy);
}

// Average ranks (1-based); ties share the mean of their rank range.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
    const size_t n = v.size();
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t(0));
    std::stable_sort(idx.begin(), idx.end(), [&](size_t i, size_t j) { return v[i] < v[j]; });
    std::vector<double> ranks(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double r = 0.5 * double(i + j) + 1.0;
        for (size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}

inline double correlation_p(double r, size_t n) {
    if (std::abs(r) >= 1.0) return 0.0;
    const double dof = double(n) - 2.0;
    const double t = r * std::sqrt(dof / (1.0 - r * r));
    return t_two_sided_p(t, dof);
}

}  // namespace detail

inline CorrelationResult correlations(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3)
        throw std::invalid_argument("correlations need equal lengths >= 3");
    CorrelationResult r;
    r.pearson_r = detail::pearson(x, y);
    r.pearson_p = detail::correlation_p(r.pearson_r, x.size());
    const auto rx = detail::average_ranks(x);
    const auto ry = detail::average_ranks(y);
    r.spearman_rho = detail::pearson(rx, ry);
    r.spearman_p = detail::correlation_p(r.spearman_rho, x.size());
    return r;
}

}  // namespace cnqe::metrics
