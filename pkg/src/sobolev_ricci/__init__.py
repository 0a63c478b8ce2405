"""Sobolev-Ricci curvature: transport curvature on graphs through rooted-tree Sobolev distances.

The main entry points are :func:`src_field` (tree-based curvature),
:func:`orc_field` (exact Ollivier-Ricci baseline), :func:`run_flow`
(curvature-driven reweighting), :func:`louvain` / :func:`ari` for
downstream clustering and :func:`manl_prune` for shortcut pruning.
"""
from .community import ari, louvain, louvain_grid, modularity
from .diagnostics import (bench, curvature_histogram, dirac_sweep, root_sensitivity,
                          tree_robustness)
from .exceptions import *  # noqa: F401,F403
from .flow import FlowState, Method, flow_step, run_flow, to_similarity
from .generators import LabeledGraph, PointCloud, knn_graph_with_labels, manifold, sbm
from .graph import (RootedTree, WeightedGraph, build_graph, dijkstra, extract_tree, kruskal_mst,
                    random_spanning_tree, root_tree, tree_path_length)
from .measures import DiscreteMeasure, MeasureSpec, build_measures, dirac, gaussian_knn_measure, lazy_rw_measure
from .orc import PathMetric, TransportProblem, exact_w1, orc_edge, orc_field
from .pruning import (PruningReport, curvature_filter, detour_test, distance_only_prune,
                      manl_prune)
from .sobolev import (CurvatureField, cut_mass, dirac_distance, sobolev_distance, src_edge,
                      src_field)

__version__ = "0.1.0"
