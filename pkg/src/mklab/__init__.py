"""Non-crossing partitions, Weingarten calculus and Rayleigh-measure moments.

Exact combinatorics lives in :mod:`mklab.nc_lattice` and
:mod:`mklab.perm_group`; :mod:`mklab.weingarten` and
:mod:`mklab.mk_transform` build on them, and :mod:`mklab.rmt_sim` checks the
large-N predictions by simulation.
"""
__version__ = "0.1.0"

from .errors import (
    ConditioningError,
    InsertionError,
    InterlacingError,
    MKLabError,
    NumericalError,
    PosetError,
    SizeLimitError,
)
from .nc_lattice import (
    KrewerasDecomposition,
    NonCrossingPartition,
    catalan,
    enumerate_nc,
    insert_at,
    kreweras,
    kreweras_decompositions,
    kreweras_points,
    leq,
    mobius_nc,
)
from .perm_group import (
    CycleType,
    Permutation,
    complement_via_group,
    embed_nc,
    gamma,
    geodesic_pairs_two_cycle,
    is_geodesic,
    length,
)
from .weingarten import WeingartenTable, build_table, haar_mixed_moment, mu_asymptotic
from .mk_transform import (
    FreeCumulantSequence,
    MomentSequence,
    cumulants_to_moments,
    mk_forward,
    mk_inverse,
    moments_to_cumulants,
    rayleigh_moments,
    thm12_sum,
    thm31_prediction,
)
from .rmt_sim import EnsembleSpec, ExperimentResult, run_concentration_experiment
