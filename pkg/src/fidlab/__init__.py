"""fidlab: average fidelity decay of perturbed unitary maps, computed three
independent ways (exact closed form, Haar Monte Carlo, simulated single-
probe-qubit readout), with kicked-top chaos diagnostics at desk scale."""

from .errors import (ConfigError, FidlabError, InputError, NumericError,
                     ResourceLimitError, VerificationError)
from .linalg import (HermitianEigen, dagger, expm_i_hermitian,
                     frobenius_distance, hermitian_eigen, kron, matmul,
                     permutation_operator, symmetric_projector, trace)
from .spinsys import (KickedTopSystem, MapPair, PerturbationSpec,
                      angular_momentum, collective_rotation_perturbation,
                      kicked_top, kicked_top_unitary, make_map_pair,
                      perturbation_unitary, register_rotation_perturbation)
from .fidelity import (FidelitySeries, HaarSampler, MomentEstimate,
                       exact_average_fidelity, exact_fidelity_series,
                       fidelity_single, haar_moment_lhs, haar_moment_rhs,
                       haar_unitary, mc_average_fidelity, saturation_floor,
                       two_point_haar_moment)
from .dqc1 import (DQC1Config, ProbeRegisterState, SeparabilityReport,
                   TraceEstimate, decoherence_factor, dqc1_average_fidelity,
                   evolve_probe_register, expected_sigma_z, sample_shots,
                   separability_check)
from .experiment import (DecayFit, ExperimentConfig, TheoremReport,
                         config_from_dict, fit_decay, load_config,
                         run_experiment, verify_theorem)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "FidlabError", "InputError", "NumericError",
    "ResourceLimitError", "VerificationError",
    "HermitianEigen", "dagger", "expm_i_hermitian", "frobenius_distance",
    "hermitian_eigen", "kron", "matmul", "permutation_operator",
    "symmetric_projector", "trace",
    "KickedTopSystem", "MapPair", "PerturbationSpec", "angular_momentum",
    "collective_rotation_perturbation", "kicked_top", "kicked_top_unitary",
    "make_map_pair", "perturbation_unitary", "register_rotation_perturbation",
    "FidelitySeries", "HaarSampler", "MomentEstimate",
    "exact_average_fidelity", "exact_fidelity_series", "fidelity_single",
    "haar_moment_lhs", "haar_moment_rhs", "haar_unitary",
    "mc_average_fidelity", "saturation_floor", "two_point_haar_moment",
    "DQC1Config", "ProbeRegisterState", "SeparabilityReport", "TraceEstimate",
    "decoherence_factor", "dqc1_average_fidelity", "evolve_probe_register",
    "expected_sigma_z", "sample_shots", "separability_check",
    "DecayFit", "ExperimentConfig", "TheoremReport", "config_from_dict",
    "fit_decay", "load_config", "run_experiment", "verify_theorem",
]
