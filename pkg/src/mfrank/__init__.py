"""Exact and mean-field PageRank, within-class fluctuations, and rank
prediction from in-degree."""
from .graph import (DegreeClassTable, DirectedGraph, class_partition, edge_degree_correlation,
                    from_edge_list, mean_in_degree, read_edge_list)
from .pagerank import ConvergenceSpec, PageRankVector, exact_solve, power_iteration, residual
from .meanfield import (MeanFieldSolution, UncorrelatedModel, aggregate_by_class, closed_form_mean,
                        closed_form_variance, coefficient_of_variation, mf_iterate, mf_variance_iterate)
from .rank_model import (RankModel, RankObservation, calibrate_A, global_rank, local_rank,
                         predict_local_rank, required_inlinks)
from .synth import DegreeLaw, GeneratorSpec, generate, sample_degree_sequence

__version__ = "0.1.0"
