#include "mvml/dataset.hpp"

#include "mvml/error.hpp"

#include <string>

namespace mvml {

void ViewData::validate() const
{
    const Eigen::Index n = features.rows();
    if (labels.rows() != n || static_cast<Eigen::Index>(missing.size()) != n) {
        throw Error(ErrorKind::InvalidInput, "view: features, labels and missing mask disagree on n");
    }
    if (!all_finite(features)) {
        throw Error(ErrorKind::InvalidInput, "view: non-finite feature entry");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = 0; k < labels.cols(); ++k) {
            const double y = labels(j, k);
            if (y != -1.0 && y != 0.0 && y != 1.0) {
                throw Error(ErrorKind::InvalidInput, "view: label (" + std::to_string(j) + ", " +
                                                         std::to_string(k) + ") not in {-1, 0, 1}");
            }
        }
        if (is_missing(j) && (!features.row(j).isZero(0.0) || !labels.row(j).isZero(0.0))) {
            throw Error(ErrorKind::InvalidInput,
                        "view: missing row " + std::to_string(j) + " is not zero-filled");
        }
    }
}

MultiViewDataset::MultiViewDataset(std::vector<ViewData> views, bool aligned)
    : views_(std::move(views)), aligned_(aligned)
{
    if (views_.empty()) {
        throw Error(ErrorKind::InvalidInput, "dataset: needs at least one view");
    }
    n_ = views_.front().features.rows();
    c_ = views_.front().labels.cols();
    if (c_ < 1) {
        throw Error(ErrorKind::InvalidInput, "dataset: needs at least one label");
    }
    for (std::size_t i = 0; i < views_.size(); ++i) {
        const ViewData& v = views_[i];
        if (v.features.rows() != n_ || v.labels.cols() != c_) {
            throw Error(ErrorKind::InvalidInput,
                        "dataset: view " + std::to_string(i) + " disagrees on n or c");
        }
        v.validate();
    }
    // Row j names one sample across views only when aligned.
    for (Eigen::Index j = 0; aligned_ && j < n_; ++j) {
        bool present = false;
        for (const ViewData& v : views_) {
            present = present || !v.is_missing(j);
        }
        if (!present) {
            throw Error(ErrorKind::InvalidInput,
                        "dataset: sample " + std::to_string(j) + " is missing from every view");
        }
    }
}

std::vector<Eigen::Index> MultiViewDataset::dims() const
{
    std::vector<Eigen::Index> out;
    out.reserve(views_.size());
    for (const ViewData& v : views_) {
        out.push_back(v.dim());
    }
    return out;
}

void WeightStack::validate(const std::vector<Eigen::Index>& dims, Eigen::Index c) const
{
    if (weights.size() != dims.size()) {
        throw Error(ErrorKind::InvalidInput, "weights: view count mismatch");
    }
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i].rows() != dims[i] || weights[i].cols() != c) {
            throw Error(ErrorKind::InvalidInput,
                        "weights: view " + std::to_string(i) + " has shape " +
                            std::to_string(weights[i].rows()) + "x" +
                            std::to_string(weights[i].cols()) + ", expected " +
                            std::to_string(dims[i]) + "x" + std::to_string(c));
        }
        if (!all_finite(weights[i])) {
            throw Error(ErrorKind::InvalidInput, "weights: non-finite entry in view " + std::to_string(i));
        }
    }
}

Matrix indicator_from(const ViewData& view)
{
    Matrix p = (view.labels.array() != 0.0).cast<double>().matrix();
    for (Eigen::Index j = 0; j < view.rows(); ++j) {
        if (view.is_missing(j)) {
            p.row(j).setZero();
        }
    }
    return p;
}

IndexList sublabel_rows(const ViewData& view, Eigen::Index k)
{
    if (k < 0 || k >= view.labels.cols()) {
        throw Error(ErrorKind::InvalidInput, "sublabel_rows: label index " + std::to_string(k) +
                                                 " out of range");
    }
    IndexList out;
    for (Eigen::Index j = 0; j < view.rows(); ++j) {
        if (!view.is_missing(j) && view.labels(j, k) == 1.0) {
            out.push_back(j);
        }
    }
    return out;
}

IndexList present_rows(const ViewData& view)
{
    IndexList out;
    out.reserve(static_cast<std::size_t>(view.rows()));
    for (Eigen::Index j = 0; j < view.rows(); ++j) {
        if (!view.is_missing(j)) {
            out.push_back(j);
        }
    }
    return out;
}

Matrix select_rows(const Matrix& m, const IndexList& rows)
{
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.row(static_cast<Eigen::Index>(r)) = m.row(rows[r]);
    }
    return out;
}

Matrix stack_predictions(const MultiViewDataset& ds, const WeightStack& w,
                         const std::vector<IndexList>& rows)
{
    if (rows.size() != ds.num_views() || w.num_views() != ds.num_views()) {
        throw Error(ErrorKind::InvalidInput, "stack_predictions: view count mismatch");
    }
    Eigen::Index total = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const ViewData& v = ds.view(i);
        if (w.weights[i].rows() != v.dim() || w.weights[i].cols() != ds.c()) {
            throw Error(ErrorKind::InvalidInput,
                        "stack_predictions: weight shape mismatch in view " + std::to_string(i));
        }
        for (Eigen::Index j : rows[i]) {
            if (j < 0 || j >= v.rows()) {
                throw Error(ErrorKind::InvalidInput,
                            "stack_predictions: row index out of range in view " + std::to_string(i));
            }
        }
        total += static_cast<Eigen::Index>(rows[i].size());
    }
    Matrix out(total, ds.c());
    Eigen::Index offset = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto count = static_cast<Eigen::Index>(rows[i].size());
        if (count == 0) {
            continue;
        }
        out.middleRows(offset, count).noalias() = select_rows(ds.view(i).features, rows[i]) * w.weights[i];
        offset += count;
    }
    return out;
}

} // namespace mvml
