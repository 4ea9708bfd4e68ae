"""Heat kernels of Laguerre and Bessel semigroups and their L^p-contractivity.

Submodules
----------
specfun
    Scaled modified Bessel functions, Kummer's function, Laguerre polynomials.
hfunc
    The gauge ``H_{eta,gamma}`` that decides contractivity.
kernels
    Closed-form heat kernels, reference measures, admissibility.
semigroup
    ``T_t`` by quadrature, ``T_t 1`` in closed form, contractivity sweeps.
cli
    The ``lpheat`` command.
"""
from .exceptions import DomainError, InconsistencyError, NonConvergenceError
from .hfunc import HParams, h_classify, h_eval, h_sup
from .kernels import (
    AlphaIndex,
    FamilyId,
    Point,
    admissible,
    kernel_log_eval,
    kernel_series_oracle,
    measure_log_density,
)
from .quadrature import QuadratureRule
from .semigroup import (
    ContractivityReport,
    TensorFunction,
    apply,
    ck_residual,
    contractivity_sweep,
    ones,
    paper_bound,
    row_mass,
    sup_tt_one,
    table1_predicate,
    tt_one_closed,
)

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "InconsistencyError",
    "NonConvergenceError",
    "HParams",
    "h_classify",
    "h_eval",
    "h_sup",
    "AlphaIndex",
    "FamilyId",
    "Point",
    "admissible",
    "kernel_log_eval",
    "kernel_series_oracle",
    "measure_log_density",
    "QuadratureRule",
    "ContractivityReport",
    "TensorFunction",
    "apply",
    "ck_residual",
    "contractivity_sweep",
    "ones",
    "paper_bound",
    "row_mass",
    "sup_tt_one",
    "table1_predicate",
    "tt_one_closed",
]
