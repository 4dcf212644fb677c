"""Single-probe-qubit (DQC1) estimation of the average fidelity.

Protocol: a probe qubit with polarization gamma is prepared in
(|0> + |1>)/sqrt(2) next to a maximally mixed N-level register.  Each step
applies the perturbation kick P conditioned on the probe being |1>, then the
map U unconditionally.  After n steps the joint state is

    rho_n = (1/N) [ |a|^2 |0><0| (x) I  +  a b* |0><1| (x) S^dag
                  + a* b |1><0| (x) S   +  |b|^2 |1><1| (x) I ]

with S = U_n P_n ... U_1 P_1 U_1^dag ... U_n^dag, which for constant maps
reduces to Tr S = Tr{(U^n)^dag U_p^n}.  Measuring the probe in the x (y)
basis yields gamma * Re (Im) of Tr S / N; squaring the two readouts
reconstructs the average fidelity.

Readout sign convention: axis x gives +Re, axis y gives +Im of Tr S / N.
Only |Tr S|^2 enters the fidelity, so this choice has no observable effect.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from . import linalg
from .errors import InputError, NumericError
from .fidelity import FidelitySeries, average_fidelity_from_trace
from .spinsys import MapPair

READOUT_AXES = ("x", "y")


@dataclass(frozen=True)
class DQC1Config:
    """Probe polarization, shot budget per readout axis, and noise model."""

    gamma: float
    shots: int
    seed: object = 0
    readout_axis: str = "x"
    readout_noise_sd: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma <= 1.0:
            raise InputError(f"gamma must lie in (0, 1], got {self.gamma}")
        if self.shots < 1:
            raise InputError(f"shots must be >= 1, got {self.shots}")
        if self.readout_axis not in READOUT_AXES:
            raise InputError(f"readout_axis must be one of {READOUT_AXES}")
        if self.readout_noise_sd < 0.0:
            raise InputError("readout_noise_sd must be >= 0")


@dataclass(frozen=True, eq=False)
class ProbeRegisterState:
    """Probe amplitudes and the accumulated register operator S after k steps."""

    alpha: complex
    beta: complex
    s_accum: np.ndarray = field(repr=False)
    dim: int
    step_count: int

    def __post_init__(self) -> None:
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise InputError(f"probe amplitudes are not normalized: {norm!r}")

    @property
    def trace_ratio(self) -> complex:
        """Tr S / N, the quantity the probe readout estimates."""
        return complex(np.trace(self.s_accum)) / self.dim


def _step_sequence(steps, n: int | None) -> tuple[list, int]:
    if isinstance(steps, MapPair):
        if n is None:
            raise InputError("n is required when passing a constant MapPair")
        kick = steps.u.conj().T @ steps.u_p
        return [(steps.u, kick)] * n, n
    seq = list(steps)
    if n is None:
        n = len(seq)
    if n > len(seq):
        raise InputError(f"need {n} steps but only {len(seq)} were given")
    return seq[:n], n


def evolve_probe_register(steps, n: int | None = None) -> ProbeRegisterState:
    """Run the conditional-kick circuit for n steps.

    ``steps`` is either a constant :class:`MapPair` (with ``n`` required) or
    a sequence of per-step ``(u_j, p_j)`` operator pairs, where ``p_j`` is the
    conditional kick and ``u_j`` the unconditional map.  The probe starts in
    (|0> + |1>)/sqrt(2), produced by the initial pi/2 rotation.
    """
    if n is not None and n < 0:
        raise InputError(f"n must be >= 0, got {n}")
    seq, n = _step_sequence(steps, n)
    dim = None
    s = None
    for u_j, p_j in seq:
        u_j = linalg.require_square(u_j)
        p_j = linalg.require_square(p_j)
        if dim is None:
            dim = u_j.shape[0]
            s = np.eye(dim, dtype=np.complex128)
        if u_j.shape[0] != dim or p_j.shape[0] != dim:
            raise InputError("all step operators must share one dimension")
        s = u_j @ p_j @ s @ u_j.conj().T
    if dim is None:
        if isinstance(steps, MapPair):
            dim = steps.dim
        else:
            raise InputError("zero steps with no dimension information")
        s = np.eye(dim, dtype=np.complex128)
    amp = 1 / np.sqrt(2)
    return ProbeRegisterState(alpha=amp, beta=amp, s_accum=s, dim=dim,
                              step_count=n)


def probe_register_density(state: ProbeRegisterState) -> np.ndarray:
    """The joint 2N x 2N probe-register density matrix."""
    n = state.dim
    s = state.s_accum
    a, b = state.alpha, state.beta
    rho = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    eye = np.eye(n)
    rho[:n, :n] = abs(a) ** 2 * eye / n
    rho[:n, n:] = a * np.conj(b) * s.conj().T / n
    rho[n:, :n] = np.conj(a) * b * s / n
    rho[n:, n:] = abs(b) ** 2 * eye / n
    return rho


def expected_sigma_z(state: ProbeRegisterState, cfg: DQC1Config) -> float:
    """Noise-free probe readout: gamma * Re or Im of Tr S / N."""
    t = state.trace_ratio
    component = t.real if cfg.readout_axis == "x" else t.imag
    return cfg.gamma * component


@dataclass(frozen=True)
class TraceEstimate:
    """Shot-sampled estimate of Tr S / N, already corrected for gamma."""

    re_mean: float
    im_mean: float
    re_stderr: float
    im_stderr: float
    shots_used: int
    gamma_corrected: bool = True


def _sample_axis(mean_sz: float, cfg: DQC1Config, rng) -> tuple[float, float]:
    # |gamma * Re t| <= 1 exactly; clip away float rounding
    p = min(max((1.0 + mean_sz) / 2.0, 0.0), 1.0)
    hits = rng.binomial(cfg.shots, p)
    p_hat = hits / cfg.shots
    sz_hat = 2.0 * p_hat - 1.0
    var = 4.0 * p_hat * (1.0 - p_hat) / cfg.shots
    if cfg.readout_noise_sd > 0.0:
        sz_hat += rng.normal(0.0, cfg.readout_noise_sd)
        var += cfg.readout_noise_sd ** 2
    return sz_hat / cfg.gamma, np.sqrt(var) / cfg.gamma


def sample_shots(state: ProbeRegisterState, cfg: DQC1Config,
                 rng=None) -> TraceEstimate:
    """Simulate shot-limited readout of both axes.

    Each axis draws ``cfg.shots`` two-outcome measurements whose success
    probability is (1 + <sigma_z>)/2, then inverts the affine readout map.
    The per-axis standard error is sqrt(p(1-p)/shots) propagated through
    that map (plus any configured Gaussian readout noise).
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    t = state.trace_ratio
    re_mean, re_stderr = _sample_axis(cfg.gamma * t.real, cfg, rng)
    im_mean, im_stderr = _sample_axis(cfg.gamma * t.imag, cfg, rng)
    return TraceEstimate(re_mean=re_mean, im_mean=im_mean,
                         re_stderr=re_stderr, im_stderr=im_stderr,
                         shots_used=cfg.shots)


def _fidelity_from_estimate(est: TraceEstimate, dim: int) -> tuple[float, float]:
    # |t|^2 from noisy means is biased upward by the estimator variance;
    # subtract it.  The stderr keeps the quadratic (chi-square) term so the
    # band stays honest when t is close to zero.
    var_re = est.re_stderr ** 2
    var_im = est.im_stderr ** 2
    t_sq = est.re_mean ** 2 + est.im_mean ** 2 - var_re - var_im
    scale = dim ** 2 / (dim ** 2 + dim)
    fid = scale * t_sq + dim / (dim ** 2 + dim)
    var_tsq = (4 * est.re_mean ** 2 * var_re + 4 * est.im_mean ** 2 * var_im
               + 2 * var_re ** 2 + 2 * var_im ** 2)
    return fid, scale * np.sqrt(var_tsq)


def dqc1_average_fidelity(pair: MapPair, n_max: int,
                          cfg: DQC1Config) -> FidelitySeries:
    """Average fidelity series from simulated probe-qubit readout.

    For each step the probe estimates t = Tr{(U^n)^dag U_p^n}/N from the x
    and y readouts; the fidelity estimate is (N^2 |t|^2 + N)/(N^2 + N) with
    the squared-mean bias removed and first-order error propagation (plus
    the quadratic noise floor).
    """
    if n_max < 0:
        raise InputError(f"n_max must be >= 0, got {n_max}")
    rng = np.random.default_rng(cfg.seed)
    u_dag = pair.u.conj().T
    s = np.eye(pair.dim, dtype=np.complex128)
    amp = 1 / np.sqrt(2)
    mean = np.empty(n_max + 1)
    stderr = np.empty(n_max + 1)
    for n in range(n_max + 1):
        if n > 0:
            s = pair.u_p @ s @ u_dag
        state = ProbeRegisterState(alpha=amp, beta=amp, s_accum=s,
                                   dim=pair.dim, step_count=n)
        est = sample_shots(state, cfg, rng)
        mean[n], stderr[n] = _fidelity_from_estimate(est, pair.dim)
    return FidelitySeries(
        n=np.arange(n_max + 1),
        dim=pair.dim,
        dqc1_mean=mean,
        dqc1_stderr=stderr,
        sample_count=cfg.shots,
        rng_seed=cfg.seed,
    )


@dataclass(frozen=True)
class SeparabilityReport:
    """Certificate that the probe-register state is a mixture of products.

    The joint state is rebuilt from the eigenbasis of S as
    (1/N) sum_j |a_j><a_j| (x) |phi_j><phi_j| with
    |a_j> = alpha |0> + beta e^{i s_j} |1>; every term is a product state by
    construction, so a small ``frobenius_distance`` to the directly evolved
    state certifies separability.
    """

    dim: int
    step_count: int
    frobenius_distance: float
    tolerance: float
    passed: bool
    eigenphases: np.ndarray = field(repr=False)
    schur_defect: float = 0.0

    @property
    def term_count(self) -> int:
        return self.dim

    @property
    def terms_are_product_states(self) -> bool:
        return True


def separability_check(state: ProbeRegisterState,
                       tol: float = 1e-8) -> SeparabilityReport:
    """Rebuild the joint state from the eigenbasis of S and compare.

    Uses the complex Schur form of the (unitary, hence normal) accumulated
    operator, which provides an orthonormal eigenbasis even with degenerate
    eigenphases.
    """
    if state.dim > 512:
        raise InputError(
            f"separability check limited to dim <= 512, got {state.dim}"
        )
    s = state.s_accum
    t, z = scipy.linalg.schur(s, output="complex")
    schur_defect = float(np.linalg.norm(t - np.diag(np.diag(t))))
    if schur_defect > 1e-8 * max(1.0, float(np.linalg.norm(s))):
        raise NumericError(
            f"accumulated operator is not normal: Schur defect {schur_defect:.3e}"
        )
    phases = np.angle(np.diag(t))
    probe = np.stack([
        np.full(state.dim, state.alpha, dtype=np.complex128),
        state.beta * np.exp(1j * phases),
    ])
    # term j contributes |a_j><a_j| (x) |phi_j><phi_j| / N
    rebuilt = np.einsum("aj,bj,ij,kj->aibk", probe, probe.conj(),
                        z, z.conj()) / state.dim
    rebuilt = rebuilt.reshape(2 * state.dim, 2 * state.dim)
    direct = probe_register_density(state)
    distance = float(np.linalg.norm(rebuilt - direct))
    return SeparabilityReport(
        dim=state.dim,
        step_count=state.step_count,
        frobenius_distance=distance,
        tolerance=tol,
        passed=distance <= tol,
        eigenphases=phases,
        schur_defect=schur_defect,
    )


def decoherence_factor(state: ProbeRegisterState) -> float:
    """Suppression of the probe's off-diagonal element after tracing out
    the register: |Tr S| / N."""
    return float(abs(state.trace_ratio))
