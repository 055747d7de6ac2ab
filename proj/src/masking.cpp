#include "mvml/masking.hpp"

#include "mvml/error.hpp"
#include "mvml/random.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mvml {

namespace {

// Stream ids for derive_seed.
enum Stream : std::uint64_t {
    kAnchor = 1,
    kViewRemoval = 2,
    kLabelRemoval = 3,
    kDealign = 4,
    kSynthClusters = 10,
    kSynthSamples = 11,
    kSynthViews = 12,
};

Eigen::Index floor_count(double fraction, Eigen::Index total)
{
    return static_cast<Eigen::Index>(std::floor(fraction * static_cast<double>(total)));
}

void remove_tags(ViewData& view, Eigen::Index k, double value, double beta, Rng& rng)
{
    IndexList candidates;
    for (Eigen::Index j = 0; j < view.rows(); ++j) {
        if (!view.is_missing(j) && view.labels(j, k) == value) {
            candidates.push_back(j);
        }
    }
    const Eigen::Index drop = floor_count(beta, static_cast<Eigen::Index>(candidates.size()));
    for (std::size_t pick : rng.sample_without_replacement(candidates.size(), static_cast<std::size_t>(drop))) {
        view.labels(candidates[pick], k) = 0.0;
    }
}

} // namespace

void CorruptionSpec::validate() const
{
    if (!(alpha >= 0.0 && alpha < 1.0)) {
        throw Error(ErrorKind::InvalidInput, "corruption: alpha must lie in [0, 1)");
    }
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw Error(ErrorKind::InvalidInput, "corruption: beta must lie in [0, 1]");
    }
}

void SyntheticSpec::validate() const
{
    if (c < 1 || n < c) {
        throw Error(ErrorKind::InvalidInput, "synthetic: need n >= c >= 1");
    }
    if (dims.empty()) {
        throw Error(ErrorKind::InvalidInput, "synthetic: need at least one view");
    }
    for (Eigen::Index d : dims) {
        if (d < 1) {
            throw Error(ErrorKind::InvalidInput, "synthetic: view dimensions must be >= 1");
        }
    }
    if (!(positives_per_sample >= 1.0) || positives_per_sample > static_cast<double>(c)) {
        throw Error(ErrorKind::InvalidInput, "synthetic: positives_per_sample must lie in [1, c]");
    }
    if (!(noise_sigma >= 0.0) || !(cluster_spread >= 0.0)) {
        throw Error(ErrorKind::InvalidInput, "synthetic: noise levels must be >= 0");
    }
}

MultiViewDataset generate_synthetic(const SyntheticSpec& spec)
{
    spec.validate();
    const Eigen::Index n = spec.n;
    const Eigen::Index c = spec.c;
    const Eigen::Index clusters = c;
    const Eigen::Index latent_dim = clusters;

    for (std::uint64_t attempt = 0; attempt < 10; ++attempt) {
        Rng cluster_rng(derive_seed(spec.seed, kSynthClusters, attempt));

        // Label pattern per cluster: label k plus extra labels.
        Matrix patterns = Matrix::Constant(clusters, c, -1.0);
        const double extra_mean = spec.positives_per_sample - 1.0;
        const auto extra_floor = static_cast<Eigen::Index>(std::floor(extra_mean));
        const double extra_frac = extra_mean - static_cast<double>(extra_floor);
        for (Eigen::Index k = 0; k < clusters; ++k) {
            patterns(k, k) = 1.0;
            Eigen::Index extra = extra_floor + (cluster_rng.uniform01() < extra_frac ? 1 : 0);
            extra = std::min(extra, c - 1);
            auto picks = cluster_rng.sample_without_replacement(static_cast<std::size_t>(c - 1),
                                                                static_cast<std::size_t>(extra));
            for (std::size_t p : picks) {
                const auto label = static_cast<Eigen::Index>(p) < k ? static_cast<Eigen::Index>(p)
                                                                    : static_cast<Eigen::Index>(p) + 1;
                patterns(k, label) = 1.0;
            }
        }
        Matrix centers(clusters, latent_dim);
        for (Eigen::Index r = 0; r < clusters; ++r) {
            for (Eigen::Index q = 0; q < latent_dim; ++q) {
                centers(r, q) = cluster_rng.normal();
            }
        }

        // Every cluster appears at least once; remaining samples uniform.
        Rng sample_rng(derive_seed(spec.seed, kSynthSamples, attempt));
        std::vector<Eigen::Index> assignment(static_cast<std::size_t>(n));
        for (Eigen::Index j = 0; j < n; ++j) {
            assignment[static_cast<std::size_t>(j)] =
                j < clusters ? j
                             : static_cast<Eigen::Index>(sample_rng.uniform_below(static_cast<std::uint64_t>(clusters)));
        }
        sample_rng.shuffle(std::span<Eigen::Index>(assignment));

        Matrix labels(n, c);
        Matrix latent(n, latent_dim);
        for (Eigen::Index j = 0; j < n; ++j) {
            const Eigen::Index g = assignment[static_cast<std::size_t>(j)];
            labels.row(j) = patterns.row(g);
            for (Eigen::Index q = 0; q < latent_dim; ++q) {
                latent(j, q) = centers(g, q) + spec.cluster_spread * sample_rng.normal();
            }
        }
        if (numeric_rank(labels, 1e-8 * spectral_norm(labels)) < c) {
            continue;
        }

        std::vector<ViewData> views;
        views.reserve(spec.dims.size());
        for (std::size_t i = 0; i < spec.dims.size(); ++i) {
            Rng view_rng(derive_seed(spec.seed, kSynthViews, attempt * 1024 + i));
            const Eigen::Index d = spec.dims[i];
            Matrix embed(latent_dim, d);
            const double scale = 1.0 / std::sqrt(static_cast<double>(latent_dim));
            for (Eigen::Index q = 0; q < latent_dim; ++q) {
                for (Eigen::Index e = 0; e < d; ++e) {
                    embed(q, e) = scale * view_rng.normal();
                }
            }
            ViewData view;
            view.features = latent * embed;
            for (Eigen::Index j = 0; j < n; ++j) {
                for (Eigen::Index e = 0; e < d; ++e) {
                    view.features(j, e) += spec.noise_sigma * view_rng.normal();
                }
            }
            view.labels = labels;
            view.missing.assign(static_cast<std::size_t>(n), 0);
            views.push_back(std::move(view));
        }
        return MultiViewDataset(std::move(views), true);
    }
    throw Error(ErrorKind::GenerationFailure,
                "synthetic: label matrix did not reach full column rank in 10 attempts");
}

MultiViewDataset corrupt(const MultiViewDataset& ds, const CorruptionSpec& spec)
{
    spec.validate();
    if (!ds.aligned()) {
        throw Error(ErrorKind::InvalidInput, "corrupt: input dataset must be aligned");
    }
    for (const ViewData& v : ds.views()) {
        if (std::any_of(v.missing.begin(), v.missing.end(), [](std::uint8_t m) { return m != 0; })) {
            throw Error(ErrorKind::InvalidInput, "corrupt: input dataset must be complete");
        }
    }

    const Eigen::Index n = ds.n();
    const std::size_t num_views = ds.num_views();
    const Eigen::Index drop = floor_count(spec.alpha, n);
    std::vector<ViewData> views = ds.views();

    if (drop > 0) {
        // Anchors dealt round-robin: view i anchors ceil or floor of n / V samples.
        const auto max_anchor = static_cast<Eigen::Index>((static_cast<std::size_t>(n) + num_views - 1) / num_views);
        if (drop > n - max_anchor) {
            throw Error(ErrorKind::InvalidInput,
                        "corrupt: removing " + std::to_string(drop) + " of " + std::to_string(n) +
                            " samples from each of " + std::to_string(num_views) +
                            " views cannot keep every sample in some view");
        }
        Rng anchor_rng(derive_seed(spec.seed, kAnchor));
        const auto order = anchor_rng.permutation(static_cast<std::size_t>(n));
        std::vector<std::size_t> anchor(static_cast<std::size_t>(n));
        for (std::size_t r = 0; r < order.size(); ++r) {
            anchor[order[r]] = r % num_views;
        }
        for (std::size_t i = 0; i < num_views; ++i) {
            IndexList candidates;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (anchor[static_cast<std::size_t>(j)] != i) {
                    candidates.push_back(j);
                }
            }
            Rng view_rng(derive_seed(spec.seed, kViewRemoval, i));
            ViewData& v = views[i];
            for (std::size_t pick : view_rng.sample_without_replacement(candidates.size(),
                                                                        static_cast<std::size_t>(drop))) {
                const Eigen::Index j = candidates[pick];
                v.missing[static_cast<std::size_t>(j)] = 1;
                v.features.row(j).setZero();
                v.labels.row(j).setZero();
            }
        }
    }

    if (spec.beta > 0.0) {
        for (std::size_t i = 0; i < num_views; ++i) {
            Rng label_rng(derive_seed(spec.seed, kLabelRemoval, i));
            for (Eigen::Index k = 0; k < ds.c(); ++k) {
                remove_tags(views[i], k, 1.0, spec.beta, label_rng);
                remove_tags(views[i], k, -1.0, spec.beta, label_rng);
            }
        }
    }

    bool aligned = ds.aligned();
    if (spec.dealign) {
        for (std::size_t i = 0; i < num_views; ++i) {
            Rng perm_rng(derive_seed(spec.seed, kDealign, i));
            const auto perm = perm_rng.permutation(static_cast<std::size_t>(n));
            ViewData& v = views[i];
            ViewData shuffled;
            shuffled.features.resize(n, v.dim());
            shuffled.labels.resize(n, ds.c());
            shuffled.missing.resize(static_cast<std::size_t>(n));
            for (Eigen::Index r = 0; r < n; ++r) {
                const auto src = static_cast<Eigen::Index>(perm[static_cast<std::size_t>(r)]);
                shuffled.features.row(r) = v.features.row(src);
                shuffled.labels.row(r) = v.labels.row(src);
                shuffled.missing[static_cast<std::size_t>(r)] = v.missing[static_cast<std::size_t>(src)];
            }
            v = std::move(shuffled);
        }
        aligned = false;
    }
    return MultiViewDataset(std::move(views), aligned);
}

Eigen::Index observed_count(const MultiViewDataset& ds)
{
    Eigen::Index total = 0;
    for (const ViewData& v : ds.views()) {
        total += static_cast<Eigen::Index>(indicator_from(v).sum());
    }
    return total;
}

} // namespace mvml
