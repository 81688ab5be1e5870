"""RECOME: relative KNN kernel density clustering with alpha jump discovery."""

from .atoms import AtomForest, build_forest, find_cores
from .dataset import BlobSpec, Dataset, generate_blobs, load_dataset, load_iris, minmax_normalize
from .density import DensityProfile, compute_nkd, compute_rnkd, density_profile
from .fdp import fdp_cluster
from .jdd import JdResult, jd_set, max_capacity_search, sweep
from .knn import KnnIndex, bandwidth_sigma, build_knn, default_k
from .merge import ClusterLabeling, KnnGraph, Recome, build_graph, cluster, merge_cores
from .metrics import MetricReport, bcubed, evaluate, nmi

__version__ = "0.1.0"
