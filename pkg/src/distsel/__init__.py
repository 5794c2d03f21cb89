"""Distance metric selection and clustering evaluation via distance
distributions: scan metrics for multimodal pairwise-distance features, model
the chosen feature with a 1-D Gaussian mixture, derive Bayes decision
boundaries, and check clusterings against them."""

from .clustering import (Agglomerative, Dendrogram, KMeansLloyd, PartitionReport,
                         accuracy, cut, evaluate_partition, evaluate_summary,
                         hcluster, inter_distances, intra_distances, kmeans,
                         robust_sd)
from .datasets import (DataMatrix, LabelVector, generate_atom, generate_golfball,
                       generate_two_gaussians, load_csv, save_csv, to_cartesian,
                       to_spherical)
from .density import (DensityEstimate, DipResult, MdPlotSpec, dip_statistic,
                      dip_test, local_maxima, md_plot, pareto_density,
                      pareto_radius)
from .distances import (ContrastReport, DistanceFeature, DistanceMatrix, MetricId,
                        compute_distance_matrix, extract_distance_feature,
                        load_distance_matrix, parse_metric, relative_contrast,
                        save_distance_matrix, scatter_feature,
                        validate_distance_matrix)
from .gmm import (BayesBoundaries, GaussianMixture1D, GofResult, QqData,
                  bayes_boundaries, chi_square_gof, fit_gmm, gmm_pdf, posterior,
                  qq_data, select_modes)
from .pipeline import (ScanResult, SessionState, run_evaluate, run_model,
                       run_scan, run_table1)
from .plotting import render_svg
from .validation import InputError

__version__ = "0.1.0"

__all__ = [
    "Agglomerative", "BayesBoundaries", "ContrastReport", "DataMatrix",
    "Dendrogram", "DensityEstimate", "DipResult", "DistanceFeature",
    "DistanceMatrix", "GaussianMixture1D", "GofResult", "InputError",
    "KMeansLloyd", "LabelVector", "MdPlotSpec", "MetricId", "PartitionReport",
    "QqData", "ScanResult", "SessionState", "accuracy", "bayes_boundaries",
    "chi_square_gof", "compute_distance_matrix", "cut", "dip_statistic",
    "dip_test", "evaluate_partition", "evaluate_summary",
    "extract_distance_feature", "fit_gmm", "generate_atom", "generate_golfball",
    "generate_two_gaussians", "gmm_pdf", "hcluster", "inter_distances",
    "intra_distances", "kmeans", "load_csv", "load_distance_matrix",
    "local_maxima", "md_plot", "pareto_density", "pareto_radius", "parse_metric",
    "posterior", "qq_data", "relative_contrast", "render_svg", "robust_sd",
    "run_evaluate", "run_model", "run_scan", "run_table1", "save_csv",
    "save_distance_matrix", "scatter_feature", "select_modes", "to_cartesian",
    "to_spherical", "validate_distance_matrix",
]
