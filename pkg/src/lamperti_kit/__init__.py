"""Markov additive processes on sign-orthant state spaces, the time change
to multi-self-similar Markov processes, spectral classification of their
asymptotics, and a Monte Carlo verification harness."""

__version__ = "0.1.0"

from ._kernels import BACKEND as kernel_backend
from .errors import (
    ConditionError,
    ConfigError,
    DomainError,
    GridError,
    LampertiKitError,
    ParseError,
    PartitionError,
    ReducibleError,
    SpecError,
)
from .lamperti import (
    MssmpPath,
    Partition,
    agglomerate_map_path,
    agglomerate_spec,
    check_mssmp_path,
    forward_transform,
    forward_value_at,
    inverse_transform,
    phi,
    phi_inverse,
    project_path,
)
from .laws import Gaussian, IndependentProduct, PointMass, SumLaw, TwoSidedExponential, Zero
from .model import (
    ExponentMatrix,
    LevyBlock,
    MapSpec,
    SignState,
    StateSet,
    directional_exponent,
    exponent_matrix,
    mgf,
    psi,
    validate_spec,
)
from .reference import (
    SpiderConfig,
    example_chain_scaling,
    example_drift_scaling,
    example_jumping_spider,
)
from .sampler import MapPath, SimConfig, empirical_exponent, sample_map_path
from .serialize import load_spec, save_spec, spec_from_dict, spec_to_dict
from .spectral import ClassificationReport, chi_derivative, classify, leading_eigenvalue, stationary_distribution
from .verify import (
    TestReport,
    e0_statistic,
    ks_two_sample,
    verify_agglomeration,
    verify_lifetime,
    verify_lln,
    verify_scaling,
)

__all__ = [
    "__version__",
    "kernel_backend",
    # errors
    "LampertiKitError",
    "DomainError",
    "SpecError",
    "GridError",
    "PartitionError",
    "ReducibleError",
    "ConditionError",
    "ConfigError",
    "ParseError",
    # laws
    "PointMass",
    "Gaussian",
    "TwoSidedExponential",
    "Zero",
    "IndependentProduct",
    "SumLaw",
    # model
    "SignState",
    "StateSet",
    "LevyBlock",
    "MapSpec",
    "ExponentMatrix",
    "mgf",
    "psi",
    "exponent_matrix",
    "directional_exponent",
    "validate_spec",
    # sampler
    "SimConfig",
    "MapPath",
    "sample_map_path",
    "empirical_exponent",
    # transforms
    "MssmpPath",
    "Partition",
    "phi",
    "phi_inverse",
    "forward_transform",
    "forward_value_at",
    "inverse_transform",
    "agglomerate_spec",
    "agglomerate_map_path",
    "project_path",
    "check_mssmp_path",
    # spectral
    "leading_eigenvalue",
    "stationary_distribution",
    "chi_derivative",
    "classify",
    "ClassificationReport",
    # reference
    "SpiderConfig",
    "example_chain_scaling",
    "example_drift_scaling",
    "example_jumping_spider",
    # verify
    "TestReport",
    "ks_two_sample",
    "verify_scaling",
    "verify_agglomeration",
    "verify_lln",
    "verify_lifetime",
    "e0_statistic",
    # io
    "spec_to_dict",
    "spec_from_dict",
    "save_spec",
    "load_spec",
]
