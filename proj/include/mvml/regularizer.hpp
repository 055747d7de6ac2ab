#pragma once

// Masked squared loss and the local-minus-global trace-norm regularizer.
//
//   loss   = 1/2 sum_i || P_i .* (X_i W_i - Y_i) ||_F^2
//   local  = sum_k || [X_k^(1) W_1; ...; X_k^(V) W_V] ||_*
//   global = || [X_1 W_1; ...; X_V W_V] ||_*
//   f      = loss + lambda (local - global)
//
// X_k^(i) holds the present rows of view i that are positively labelled with
// label k. The global stack uses all present rows; missing rows are zero and
// would not change its singular values anyway.

#include "mvml/dataset.hpp"

#include <vector>

namespace mvml {

/// Per-label row selections: rows[k][i] lists the rows of view i in the
/// stack for label k.
struct LabelBlocks {
    std::vector<std::vector<IndexList>> rows;
    std::vector<IndexList> present; // present rows per view

    static LabelBlocks from(const MultiViewDataset& ds);

    std::size_t stack_rows(std::size_t k) const;
    bool empty(std::size_t k) const { return stack_rows(k) == 0; }
};

struct RegularizerTerms {
    double local_term = 0.0;
    double global_term = 0.0;
};

struct ObjectiveValue {
    double loss = 0.0;
    double local_term = 0.0;
    double global_term = 0.0;
    double lambda = 0.0;

    double regularizer() const noexcept { return local_term - global_term; }
    double total() const noexcept { return loss + lambda * regularizer(); }
};

double masked_loss(const MultiViewDataset& ds, const WeightStack& w);

RegularizerTerms regularizer_value(const MultiViewDataset& ds, const WeightStack& w);
RegularizerTerms regularizer_value(const MultiViewDataset& ds, const WeightStack& w,
                                   const LabelBlocks& blocks);

ObjectiveValue objective(const MultiViewDataset& ds, const WeightStack& w, double lambda);

} // namespace mvml
