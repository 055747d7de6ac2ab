#include "mvml/regularizer.hpp"

#include "mvml/error.hpp"

#include <cmath>

namespace mvml {

LabelBlocks LabelBlocks::from(const MultiViewDataset& ds)
{
    LabelBlocks out;
    out.rows.resize(static_cast<std::size_t>(ds.c()));
    for (Eigen::Index k = 0; k < ds.c(); ++k) {
        auto& per_view = out.rows[static_cast<std::size_t>(k)];
        per_view.reserve(ds.num_views());
        for (const ViewData& v : ds.views()) {
            per_view.push_back(sublabel_rows(v, k));
        }
    }
    for (const ViewData& v : ds.views()) {
        out.present.push_back(present_rows(v));
    }
    return out;
}

std::size_t LabelBlocks::stack_rows(std::size_t k) const
{
    std::size_t total = 0;
    for (const IndexList& r : rows.at(k)) {
        total += r.size();
    }
    return total;
}

double masked_loss(const MultiViewDataset& ds, const WeightStack& w)
{
    w.validate(ds.dims(), ds.c());
    double total = 0.0;
    for (std::size_t i = 0; i < ds.num_views(); ++i) {
        const ViewData& v = ds.view(i);
        const Matrix p = indicator_from(v);
        const Matrix residual = p.cwiseProduct(v.features * w.weights[i] - v.labels);
        total += 0.5 * residual.squaredNorm();
    }
    return total;
}

RegularizerTerms regularizer_value(const MultiViewDataset& ds, const WeightStack& w,
                                   const LabelBlocks& blocks)
{
    RegularizerTerms out;
    // Fixed label order keeps the sum reproducible.
    for (std::size_t k = 0; k < blocks.rows.size(); ++k) {
        if (blocks.empty(k)) {
            continue;
        }
        out.local_term += nuclear_norm(stack_predictions(ds, w, blocks.rows[k]));
    }
    out.global_term = nuclear_norm(stack_predictions(ds, w, blocks.present));
    return out;
}

RegularizerTerms regularizer_value(const MultiViewDataset& ds, const WeightStack& w)
{
    w.validate(ds.dims(), ds.c());
    return regularizer_value(ds, w, LabelBlocks::from(ds));
}

ObjectiveValue objective(const MultiViewDataset& ds, const WeightStack& w, double lambda)
{
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw Error(ErrorKind::InvalidInput, "objective: lambda must be finite and >= 0");
    }
    ObjectiveValue out;
    out.lambda = lambda;
    out.loss = masked_loss(ds, w);
    const RegularizerTerms terms = regularizer_value(ds, w);
    out.local_term = terms.local_term;
    out.global_term = terms.global_term;
    return out;
}

} // namespace mvml
