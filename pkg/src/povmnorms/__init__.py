"""Lp-type norms of operator-valued functions over discrete POVMs.

The package provides finite-dimensional POVMs and quantum random variables,
operator-valued integration, the variational p-norm and decomposable p-norm,
Schatten-mixed and separable-state seminorms, randomized verification suites
for the proved inequalities, and a counterexample searcher for the open ones.
"""

from .errors import DomainError, FormatError
from .linalg import (
    SpectralDecomposition,
    hermitian_parts,
    kron,
    loewner_geq,
    matrix_power,
    polar_parts,
    pos_neg_parts,
    psd_check,
    schatten_norm,
    spectral_decomposition,
)
from .norms import (
    NormId,
    candidate_norm,
    compute_norm,
    dec_p_norm,
    inf_norm,
    naive_norm,
    one_norm,
    p_norm,
    parse_norm_id,
    schatten_mixed,
)
from .optimize import (
    NormEstimate,
    SolverConfig,
    inf_block_dec,
    inf_decomposition_pnorm,
    sup_state_lp,
)
from .oracle import OracleInstance, brute_force_oracle
from .povm import (
    DensityOperator,
    DiscretePOVM,
    RNDerivative,
    SampleSpace,
    ScalarMeasure,
    density,
    induced_measure,
    maximally_mixed,
    povm,
    pure_state,
    rn_derivative,
    scalar_povm,
    space,
    validate_povm,
)
from .qrv import QRV, MeasureContext, commutes, constant_qrv, context, integrate, pairing, qrv
from .tensor import ProductState, SepVerdict, sep_norms, sep_sup_state_lp, tensor_context, tensor_povm, tensor_qrv
from .verify import SUITE_IDS, VerifyReport, re_evaluate, run_suite
from .search import CONJECTURES, SearchResult, search_counterexample, verify_triangle_witness
from .generators import random_instance

__all__ = [name for name in dir() if not name.startswith("_")]
