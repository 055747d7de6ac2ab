#pragma once

// Seeded corruption of clean multi-view data (incomplete views, missing
// labels, view de-alignment) and a planted-structure synthetic generator.

#include "mvml/dataset.hpp"

#include <cstdint>
#include <vector>

namespace mvml {

struct CorruptionSpec {
    double alpha = 0.0; // fraction of samples removed per view, in [0, 1)
    double beta = 0.0;  // fraction of positive and of negative tags removed per label, in [0, 1]
    bool dealign = false;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SyntheticSpec {
    Eigen::Index n = 2000;
    Eigen::Index c = 30;
    std::vector<Eigen::Index> dims = {40, 60, 80}; // one entry per view
    double positives_per_sample = 3.0;
    double noise_sigma = 0.5;
    /// Standard deviation of a sample's latent code around its cluster centre.
    double cluster_spread = 0.5;
    std::uint64_t seed = 0;

    std::size_t num_views() const noexcept { return dims.size(); }
    void validate() const;
};

/// Aligned, complete dataset with one latent cluster per label. Cluster k
/// carries label k plus about positives_per_sample - 1 further labels, so the
/// rows sharing a label come from few clusters (low-rank sub-label matrices)
/// while the whole label matrix has full column rank. Each view is its own
/// random linear embedding of the latent codes plus Gaussian noise.
/// Throws GenerationFailure if full column rank is not reached in 10 attempts.
MultiViewDataset generate_synthetic(const SyntheticSpec& spec);

/// Applies, in order: view incompleteness, label removal, de-alignment.
///
/// View incompleteness marks floor(alpha n) rows missing in every view while
/// keeping each sample present in at least one view. Each sample is first
/// given an anchor view (a uniform permutation dealt round-robin over the
/// views); a view then drops a uniform subset of the samples not anchored to
/// it. Throws InvalidInput when the counts make this impossible.
///
/// Label removal, per view and per label, zeroes floor(beta * #positives)
/// positive and floor(beta * #negatives) negative tags drawn uniformly among
/// the present rows.
///
/// De-alignment applies an independent uniform row permutation per view.
MultiViewDataset corrupt(const MultiViewDataset& ds, const CorruptionSpec& spec);

/// Number of observed label entries (P = 1) over all views.
Eigen::Index observed_count(const MultiViewDataset& ds);

} // namespace mvml
