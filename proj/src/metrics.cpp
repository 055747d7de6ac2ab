#include "mvml/metrics.hpp"

#include "mvml/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mvml {

namespace {

void check_inputs(const Matrix& scores, const Matrix& truth, const char* op)
{
    if (scores.rows() != truth.rows() || scores.cols() != truth.cols()) {
        throw Error(ErrorKind::InvalidInput, std::string(op) + ": scores and truth differ in shape");
    }
    if (scores.size() == 0) {
        throw Error(ErrorKind::InvalidInput, std::string(op) + ": empty input");
    }
    if (!all_finite(scores)) {
        throw Error(ErrorKind::InvalidInput, std::string(op) + ": non-finite score");
    }
    for (Eigen::Index j = 0; j < truth.rows(); ++j) {
        for (Eigen::Index k = 0; k < truth.cols(); ++k) {
            if (truth(j, k) != 1.0 && truth(j, k) != -1.0) {
                throw Error(ErrorKind::InvalidInput, std::string(op) + ": truth entry not in {-1, +1}");
            }
        }
    }
}

} // namespace

double hamming_loss(const Matrix& scores, const Matrix& truth)
{
    check_inputs(scores, truth, "hamming_loss");
    Eigen::Index wrong = 0;
    for (Eigen::Index j = 0; j < scores.rows(); ++j) {
        for (Eigen::Index k = 0; k < scores.cols(); ++k) {
            const double predicted = scores(j, k) >= 0.0 ? 1.0 : -1.0;
            wrong += predicted != truth(j, k) ? 1 : 0;
        }
    }
    return static_cast<double>(wrong) / static_cast<double>(scores.size());
}

double ranking_loss(const Matrix& scores, const Matrix& truth)
{
    check_inputs(scores, truth, "ranking_loss");
    double sum = 0.0;
    Eigen::Index counted = 0;
    std::vector<double> irrelevant;
    for (Eigen::Index j = 0; j < scores.rows(); ++j) {
        irrelevant.clear();
        for (Eigen::Index k = 0; k < scores.cols(); ++k) {
            if (truth(j, k) < 0.0) {
                irrelevant.push_back(scores(j, k));
            }
        }
        const auto n_irr = static_cast<Eigen::Index>(irrelevant.size());
        const Eigen::Index n_rel = scores.cols() - n_irr;
        if (n_rel == 0 || n_irr == 0) {
            continue;
        }
        std::sort(irrelevant.begin(), irrelevant.end());
        Eigen::Index bad = 0;
        for (Eigen::Index k = 0; k < scores.cols(); ++k) {
            if (truth(j, k) > 0.0) {
                // irrelevant labels scored >= this relevant one
                const auto first = std::lower_bound(irrelevant.begin(), irrelevant.end(), scores(j, k));
                bad += static_cast<Eigen::Index>(irrelevant.end() - first);
            }
        }
        sum += static_cast<double>(bad) / static_cast<double>(n_rel * n_irr);
        ++counted;
    }
    if (counted == 0) {
        throw Error(ErrorKind::UndefinedMetric, "ranking_loss: no sample has both relevant and irrelevant labels");
    }
    return sum / static_cast<double>(counted);
}

double average_precision(const Matrix& scores, const Matrix& truth)
{
    check_inputs(scores, truth, "average_precision");
    const Eigen::Index c = scores.cols();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(c));
    double sum = 0.0;
    Eigen::Index counted = 0;
    for (Eigen::Index j = 0; j < scores.rows(); ++j) {
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](Eigen::Index a, Eigen::Index b) { return scores(j, a) > scores(j, b); });
        Eigen::Index hits = 0;
        double precision_sum = 0.0;
        for (Eigen::Index r = 0; r < c; ++r) {
            if (truth(j, order[static_cast<std::size_t>(r)]) > 0.0) {
                ++hits;
                precision_sum += static_cast<double>(hits) / static_cast<double>(r + 1);
            }
        }
        if (hits == 0) {
            continue;
        }
        sum += precision_sum / static_cast<double>(hits);
        ++counted;
    }
    if (counted == 0) {
        throw Error(ErrorKind::UndefinedMetric, "average_precision: no sample has a relevant label");
    }
    return sum / static_cast<double>(counted);
}

double adapted_auc(const Matrix& scores, const Matrix& truth)
{
    check_inputs(scores, truth, "adapted_auc");
    const Eigen::Index n = scores.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    double sum = 0.0;
    Eigen::Index counted = 0;
    for (Eigen::Index k = 0; k < scores.cols(); ++k) {
        // Mann-Whitney: rank sum of positives with mid-ranks for ties.
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::sort(order.begin(), order.end(),
                  [&](Eigen::Index a, Eigen::Index b) { return scores(a, k) < scores(b, k); });
        double positive_rank_sum = 0.0;
        Eigen::Index positives = 0;
        std::size_t start = 0;
        while (start < order.size()) {
            std::size_t stop = start + 1;
            while (stop < order.size() && scores(order[stop], k) == scores(order[start], k)) {
                ++stop;
            }
            const double mid_rank = 0.5 * static_cast<double>(start + 1 + stop);
            for (std::size_t r = start; r < stop; ++r) {
                if (truth(order[r], k) > 0.0) {
                    positive_rank_sum += mid_rank;
                    ++positives;
                }
            }
            start = stop;
        }
        const Eigen::Index negatives = n - positives;
        if (positives == 0 || negatives == 0) {
            continue;
        }
        const double p = static_cast<double>(positives);
        const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
        sum += u / (p * static_cast<double>(negatives));
        ++counted;
    }
    if (counted == 0) {
        throw Error(ErrorKind::UndefinedMetric, "adapted_auc: no label has both positive and negative samples");
    }
    return sum / static_cast<double>(counted);
}

MetricsReport evaluate(const Matrix& scores, const Matrix& truth)
{
    MetricsReport out;
    out.one_minus_hl = 1.0 - hamming_loss(scores, truth);
    out.one_minus_rl = 1.0 - ranking_loss(scores, truth);
    out.ap = average_precision(scores, truth);
    out.auc = adapted_auc(scores, truth);
    out.n_test = scores.rows();
    out.c = scores.cols();
    return out;
}

RankDiagnostics rank_diagnostics(const Matrix& pred, const std::vector<IndexList>& sublabel_rows, double tol)
{
    auto rank_of = [tol](const Matrix& m) {
        const double sigma_tol = tol >= 0.0 ? tol : 1e-8 * spectral_norm(m);
        return numeric_rank(m, sigma_tol);
    };
    RankDiagnostics out;
    out.entire_rank = rank_of(pred);
    out.entire_nuclear = nuclear_norm(pred);
    std::vector<double> nonempty_nuclear;
    double rank_sum = 0.0;
    for (const IndexList& rows : sublabel_rows) {
        for (Eigen::Index r : rows) {
            if (r < 0 || r >= pred.rows()) {
                throw Error(ErrorKind::InvalidInput, "rank_diagnostics: row index out of range");
            }
        }
        if (rows.empty()) {
            out.sub_ranks.push_back(0);
            out.sub_nuclear.push_back(0.0);
            continue;
        }
        const Matrix sub = select_rows(pred, rows);
        out.sub_ranks.push_back(rank_of(sub));
        out.sub_nuclear.push_back(nuclear_norm(sub));
        nonempty_nuclear.push_back(out.sub_nuclear.back());
        rank_sum += out.sub_ranks.back();
    }
    if (!nonempty_nuclear.empty()) {
        const auto count = static_cast<double>(nonempty_nuclear.size());
        out.sub_rank_mean = rank_sum / count;
        out.sub_nuclear_mean = std::accumulate(nonempty_nuclear.begin(), nonempty_nuclear.end(), 0.0) / count;
        std::sort(nonempty_nuclear.begin(), nonempty_nuclear.end());
        const std::size_t mid = nonempty_nuclear.size() / 2;
        out.sub_nuclear_median = nonempty_nuclear.size() % 2 == 1
                                     ? nonempty_nuclear[mid]
                                     : 0.5 * (nonempty_nuclear[mid - 1] + nonempty_nuclear[mid]);
    }
    return out;
}

double nemenyi_cd(int k, int n_results, double q_alpha, bool conventional)
{
    if (k < 2 || n_results < 1 || !(q_alpha > 0.0)) {
        throw Error(ErrorKind::InvalidInput, "nemenyi_cd: need k >= 2, N >= 1 and q_alpha > 0");
    }
    const double kk = static_cast<double>(k);
    const double denom = static_cast<double>(n_results) * (conventional ? 6.0 : 1.0);
    return q_alpha * std::sqrt(kk * (kk + 1.0) / denom);
}

} // namespace mvml
