"""Exact classical simulation of Fourier sampling and its probability bounds.

Submodules:

- ``numtheory``       integer utilities and continued-fraction recovery
- ``finite_fourier``  DFT on Z_q, time/band-limiting, uncertainty principles
- ``sampling``        exact measurement distributions and seeded sampling
- ``bounds``          lower bounds for zero-padded sampling (one and several registers)
- ``factoring``       order finding / factoring pipeline and certificates
- ``dlog``            discrete-log pipeline and certificates
- ``suites``          case generators for the inequality checks
- ``cli``             command-line entry point
"""

from .bounds import (
    BoundReport,
    QaupV1Input,
    QaupV2Input,
    aggregate,
    qaup_v1_bound,
    qaup_v1_evaluate,
    qaup_v1a_bound,
    qaup_v2_bound,
    qaup_v2_evaluate,
)
from .dlog import DlogConfig, DlogTranscript, run_dlog
from .errors import ModulusMismatchError, NotCoprimeError, PreconditionError, SizeLimitError
from .factoring import FactoringConfig, Transcript, choose_parameters, run_factoring
from .finite_fourier import (
    IndexSet,
    band_limit,
    check_up_v1,
    check_up_v3,
    composed_operator_norm,
    dft,
    dft_direct,
    idft,
    time_limit,
)
from .numtheory import convergents, euler_phi, mod_pow, multiplicative_order, recover_denominator
from .sampling import (
    Distribution,
    MultiDimInstance,
    SamplingInstance,
    full_distribution,
    prob_point,
    prob_set,
    prob_via_operators,
    sample,
)

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "Distribution",
    "DlogConfig",
    "DlogTranscript",
    "FactoringConfig",
    "IndexSet",
    "ModulusMismatchError",
    "MultiDimInstance",
    "NotCoprimeError",
    "PreconditionError",
    "QaupV1Input",
    "QaupV2Input",
    "SamplingInstance",
    "SizeLimitError",
    "Transcript",
    "aggregate",
    "band_limit",
    "check_up_v1",
    "check_up_v3",
    "choose_parameters",
    "composed_operator_norm",
    "convergents",
    "dft",
    "dft_direct",
    "euler_phi",
    "full_distribution",
    "idft",
    "mod_pow",
    "multiplicative_order",
    "prob_point",
    "prob_set",
    "prob_via_operators",
    "qaup_v1_bound",
    "qaup_v1_evaluate",
    "qaup_v1a_bound",
    "qaup_v2_bound",
    "qaup_v2_evaluate",
    "recover_denominator",
    "run_dlog",
    "run_factoring",
    "sample",
    "time_limit",
]
