"""Discrete commutative hypergroups and character amenability diagnostics."""

from .amenability import (AmenabilityVerdict, ReiterCertificate, c0_probe,
                          classify, derivation_probe, point_mass, reiter_lp)
from .core import (Character, Hypergroup, PointMeasure, WeightedSequence,
                   convolve, convolve_points, fourier, norm_profile,
                   table_to_json, translate)
from .errors import (ConfigError, HyplabError, LpInfeasibleError,
                     QuadratureError, StructureError)
from .families import (PolynomialTable, RecursionFamily, build_table,
                       family_assoc_legendre, family_chebyshev, family_custom,
                       family_from_spec, family_graph, family_jacobi,
                       family_pollaczek, family_soradi, graph_spectral_points,
                       linearize, orthogonality_check, verify_hypergroup)
from .joins import (FiniteTable, JoinTable, extend_character, join,
                    join_dual_enumerate, transfer_check, verify_join_axioms)
from .twovar import (DiscFamily, ProductTable, disc_character, disc_linearize,
                     koornwinder_region, product_table)

__version__ = "0.1.0"
