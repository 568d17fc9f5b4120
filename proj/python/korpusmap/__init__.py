"""Document maps from judgment corpora: TF-IDF, PCA, t-SNE and map metrics."""

from ._core import (
    Corpus,
    Error,
    FormatError,
    PreconditionError,
    affinities,
    grid_occupancy,
    kl_divergence,
    gradient,
    knn_label_agreement,
    make_bundle,
    normalize_bundle,
    pca,
    render_svg,
    run_cli,
    tfidf,
    tokenize,
    tsne,
)

__all__ = [
    "Corpus",
    "Error",
    "FormatError",
    "PreconditionError",
    "affinities",
    "grid_occupancy",
    "kl_divergence",
    "gradient",
    "knn_label_agreement",
    "make_bundle",
    "normalize_bundle",
    "pca",
    "render_svg",
    "run_cli",
    "tfidf",
    "tokenize",
    "tsne",
]
