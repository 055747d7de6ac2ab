#pragma once

// Multi-label evaluation metrics, rank diagnostics and the Nemenyi critical
// difference. `truth` is an n x c matrix with entries in {-1, +1}.
//
// Tie rules:
//   - Hamming loss thresholds scores at 0; a score of exactly 0 predicts +1.
//   - Ranking loss counts a tie between a relevant and an irrelevant label as
//     a mis-ordered pair.
//   - Average precision sorts by descending score, ties by ascending label index.
//   - Adapted AUC counts a tie as half a correctly ordered pair and
//     macro-averages over labels that have both classes.

#include "mvml/dataset.hpp"

#include <vector>

namespace mvml {

struct MetricsReport {
    double one_minus_hl = 0.0;
    double one_minus_rl = 0.0;
    double ap = 0.0;
    double auc = 0.0;
    Eigen::Index n_test = 0;
    Eigen::Index c = 0;
};

struct RankDiagnostics {
    int entire_rank = 0;
    double entire_nuclear = 0.0;
    std::vector<int> sub_ranks; // per label; 0 for an empty stack
    std::vector<double> sub_nuclear;
    double sub_nuclear_mean = 0.0;
    double sub_nuclear_median = 0.0;
    double sub_rank_mean = 0.0; // over non-empty stacks
};

double hamming_loss(const Matrix& scores, const Matrix& truth);
double ranking_loss(const Matrix& scores, const Matrix& truth);
double average_precision(const Matrix& scores, const Matrix& truth);
double adapted_auc(const Matrix& scores, const Matrix& truth);

MetricsReport evaluate(const Matrix& scores, const Matrix& truth);

/// Ranks count singular values above tol; tol < 0 selects 1e-8 * sigma_max
/// of each matrix. sublabel_rows index rows of pred.
RankDiagnostics rank_diagnostics(const Matrix& pred, const std::vector<IndexList>& sublabel_rows,
                                 double tol = -1.0);

/// CD = q_alpha sqrt(k (k + 1) / N). The textbook Nemenyi statistic divides
/// by 6N instead; conventional = true selects that form.
double nemenyi_cd(int k, int n_results, double q_alpha, bool conventional = false);

} // namespace mvml
