#pragma once

// Multi-view multi-label containers.
//
// Every view keeps all n rows. A sample absent from a view is stored as an
// all-zero feature row and an all-zero label row, flagged in missing_rows.
// Labels live in {-1, 0, +1}; 0 means "not observed".

#include "mvml/linalg.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mvml {

using IndexList = std::vector<Eigen::Index>;

struct ViewData {
    Matrix features;                   // n x d_i
    Matrix labels;                     // n x c, entries in {-1, 0, +1}
    std::vector<std::uint8_t> missing; // length n; 1 = sample absent from this view

    Eigen::Index rows() const noexcept { return features.rows(); }
    Eigen::Index dim() const noexcept { return features.cols(); }
    bool is_missing(Eigen::Index j) const { return missing[static_cast<std::size_t>(j)] != 0; }

    /// Throws InvalidInput when the view breaks its invariants.
    void validate() const;
};

class MultiViewDataset {
public:
    MultiViewDataset() = default;
    /// Validates every invariant; throws InvalidInput on violation.
    MultiViewDataset(std::vector<ViewData> views, bool aligned);

    const std::vector<ViewData>& views() const noexcept { return views_; }
    const ViewData& view(std::size_t i) const { return views_.at(i); }
    std::size_t num_views() const noexcept { return views_.size(); }
    Eigen::Index n() const noexcept { return n_; }
    Eigen::Index c() const noexcept { return c_; }
    bool aligned() const noexcept { return aligned_; }
    std::vector<Eigen::Index> dims() const;

private:
    std::vector<ViewData> views_;
    Eigen::Index n_ = 0;
    Eigen::Index c_ = 0;
    bool aligned_ = false;
};

struct WeightStack {
    std::vector<Matrix> weights; // d_i x c per view

    std::size_t num_views() const noexcept { return weights.size(); }
    /// Checks cols == c, row counts against dims and finiteness.
    void validate(const std::vector<Eigen::Index>& dims, Eigen::Index c) const;
};

/// P_jk = 1 iff label_jk != 0 and row j is present in the view.
Matrix indicator_from(const ViewData& view);

/// Rows j of the view with label_jk == +1 that are present, ascending.
IndexList sublabel_rows(const ViewData& view, Eigen::Index k);

/// Present rows of the view, ascending.
IndexList present_rows(const ViewData& view);

/// Vertical stack, in view order, of features(rows[i], :) * W_i.
Matrix stack_predictions(const MultiViewDataset& ds, const WeightStack& w,
                         const std::vector<IndexList>& rows);

/// Row-selected copy of m.
Matrix select_rows(const Matrix& m, const IndexList& rows);

} // namespace mvml
