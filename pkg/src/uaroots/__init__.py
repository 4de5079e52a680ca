"""Root finding in randomly grown trees."""
from ._backend import BACKEND
from .centrality import (CentralityReport, central_path_and_phi, centrality_report,
                         competitor_count, log_phi_profile, phi_ratio_exact, rank_nodes,
                         root_rank, select_roots)
from .flows import (CountCertificate, GammaFlow, PreflowGenerator, certified_nx_bound,
                    dary_domination_check, enumerate_small_ratio_set, erdos_certificate,
                    gamma_value, partition_count)
from .growth import GrowthConfig, UrnState, grow, grow_ua, grow_ua_regular, polya_urn
from .tree import InvalidTree, PlaneTree
from .words import Word, validate_plane_tree

__version__ = "0.1.0"
