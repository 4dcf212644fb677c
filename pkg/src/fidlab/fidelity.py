"""Fidelity decay estimators and Haar-moment identities.

The overlap F_n(psi) = |<psi| (U^n)^dag U_p^n |psi>|^2 between a state evolved
by a map U and by its perturbed partner U_p is computed three ways:

* per-state, by repeated application of the maps to state vectors;
* exactly on average, via the closed form
  (|Tr{(U^n)^dag U_p^n}|^2 + N) / (N^2 + N);
* by Monte Carlo over random initial states (Haar or computational basis).

The closed form is the ell = 2, unitary case of the general identity relating
Haar averages of products of expectation values to a trace against the
symmetric-subspace projector; both sides of that identity are implemented
here for numerical verification at ell <= 4.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import InputError
from .spinsys import MapPair

MAX_MOMENT_ORDER = 4


@dataclass
class FidelitySeries:
    """Per-step fidelity estimates; absent estimators stay ``None``.

    ``exact`` is the closed-form average, ``mc_*`` the sample mean and
    standard error over random initial states, ``dqc1_*`` the probe-qubit
    estimate.  ``sample_count`` is the number of Monte Carlo states or
    measurement shots, depending on which estimator filled the record.
    """

    n: np.ndarray
    dim: int
    exact: np.ndarray | None = None
    mc_mean: np.ndarray | None = None
    mc_stderr: np.ndarray | None = None
    dqc1_mean: np.ndarray | None = None
    dqc1_stderr: np.ndarray | None = None
    sample_count: int | None = None
    rng_seed: object = None

    @property
    def n_max(self) -> int:
        return int(self.n[-1])


def saturation_floor(dim: int) -> float:
    """Long-time asymptote (1 + N) / (N^2 + N) of the exact average."""
    return (1 + dim) / (dim ** 2 + dim)


def average_fidelity_from_trace(t: np.ndarray | complex, dim: int):
    """Map echo-operator traces to average fidelity: (|t|^2 + N) / (N^2 + N)."""
    t = np.asarray(t)
    return (np.abs(t) ** 2 + dim) / (dim ** 2 + dim)


def echo_traces(pair: MapPair, n_max: int) -> np.ndarray:
    """Traces t_n = Tr{(U^n)^dag U_p^n} for n = 0..n_max.

    Accumulates E_{n+1} = U^dag E_n U_p, one pair of multiplies per step.
    """
    if n_max < 0:
        raise InputError(f"n_max must be >= 0, got {n_max}")
    u_dag = pair.u.conj().T
    echo = np.eye(pair.dim, dtype=np.complex128)
    traces = np.empty(n_max + 1, dtype=np.complex128)
    traces[0] = pair.dim
    for n in range(1, n_max + 1):
        echo = u_dag @ echo @ pair.u_p
        traces[n] = np.trace(echo)
    return traces


def exact_average_fidelity(pair: MapPair, n: int) -> float:
    """Closed-form average fidelity at step n."""
    if n < 0:
        raise InputError(f"n must be >= 0, got {n}")
    t = echo_traces(pair, n)[n]
    return float(average_fidelity_from_trace(t, pair.dim))


def exact_fidelity_series(pair: MapPair, n_max: int) -> FidelitySeries:
    """Closed-form average fidelity for every step 0..n_max in one pass."""
    t = echo_traces(pair, n_max)
    return FidelitySeries(
        n=np.arange(n_max + 1),
        dim=pair.dim,
        exact=average_fidelity_from_trace(t, pair.dim),
    )


def _require_state(psi: np.ndarray, dim: int) -> np.ndarray:
    v = np.asarray(psi, dtype=np.complex128).reshape(-1)
    if v.shape[0] != dim:
        raise InputError(f"state dimension {v.shape[0]} does not match {dim}")
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > 1e-12:
        raise InputError(f"state is not normalized: ||psi|| = {norm!r}")
    return v


def fidelity_single(pair: MapPair, psi: np.ndarray, n: int) -> float:
    """|<psi| (U^n)^dag U_p^n |psi>|^2 for one initial state.

    Powers act on the state vectors directly (cost n * N^2 per state).
    """
    if n < 0:
        raise InputError(f"n must be >= 0, got {n}")
    v = _require_state(psi, pair.dim)
    psi_u = v.copy()
    psi_p = v.copy()
    for _ in range(n):
        psi_u = pair.u @ psi_u
        psi_p = pair.u_p @ psi_p
    return float(abs(np.vdot(psi_u, psi_p)) ** 2)


class HaarSampler:
    """Haar-distributed pure states of a given dimension.

    States are normalized complex-Gaussian vectors, which makes the
    distribution exactly unitarily invariant.  Deterministic under a fixed
    seed; ``draw_count`` tracks how many states have been produced.
    """

    def __init__(self, dim: int, seed) -> None:
        if dim < 1:
            raise InputError(f"dim must be >= 1, got {dim}")
        self.dim = int(dim)
        self.seed = seed
        self.draw_count = 0
        self._rng = np.random.default_rng(seed)

    def states(self, count: int) -> np.ndarray:
        """Matrix of ``count`` unit-norm columns."""
        if count < 1:
            raise InputError(f"count must be >= 1, got {count}")
        z = self._rng.standard_normal((self.dim, count)) \
            + 1j * self._rng.standard_normal((self.dim, count))
        z /= np.linalg.norm(z, axis=0)
        self.draw_count += count
        return z

    def state(self) -> np.ndarray:
        return self.states(1)[:, 0]


def haar_unitary(dim: int, seed) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def basis_states(dim: int, count: int, seed) -> np.ndarray:
    """Matrix of ``count`` computational basis columns, drawn at random.

    Sampling is without replacement while count <= dim, with replacement
    beyond that.
    """
    rng = np.random.default_rng(seed)
    idx = rng.choice(dim, size=count, replace=count > dim)
    states = np.zeros((dim, count), dtype=np.complex128)
    states[idx, np.arange(count)] = 1.0
    return states


def mc_average_fidelity(pair: MapPair, n_max: int, samples: int, seed,
                        sampler: str = "haar") -> FidelitySeries:
    """Monte Carlo average fidelity over random initial states.

    Parameters
    ----------
    samples:
        Number of initial states M (at least 2, for the standard error).
    sampler:
        ``"haar"`` for Haar-random states, ``"basis"`` for computational
        basis states.
    """
    if n_max < 0:
        raise InputError(f"n_max must be >= 0, got {n_max}")
    if samples < 2:
        raise InputError(f"samples must be >= 2, got {samples}")
    if sampler == "haar":
        psi = HaarSampler(pair.dim, seed).states(samples)
    elif sampler == "basis":
        psi = basis_states(pair.dim, samples, seed)
    else:
        raise InputError(f"unknown sampler {sampler!r}")

    mean = np.empty(n_max + 1)
    stderr = np.empty(n_max + 1)
    psi_u = psi.copy()
    psi_p = psi.copy()
    sqrt_m = np.sqrt(samples)
    for n in range(n_max + 1):
        if n > 0:
            psi_u = pair.u @ psi_u
            psi_p = pair.u_p @ psi_p
        overlaps = np.sum(psi_u.conj() * psi_p, axis=0)
        f = np.abs(overlaps) ** 2
        mean[n] = f.mean()
        stderr[n] = f.std(ddof=1) / sqrt_m
    return FidelitySeries(
        n=np.arange(n_max + 1),
        dim=pair.dim,
        mc_mean=mean,
        mc_stderr=stderr,
        sample_count=samples,
        rng_seed=seed,
    )


@dataclass(frozen=True)
class MomentEstimate:
    """Monte Carlo estimate of a complex moment with its standard error."""

    value: complex
    stderr: float
    samples: int


def _check_moment_ops(ops) -> tuple[list[np.ndarray], int]:
    mats = [linalg.require_square(op) for op in ops]
    if not 1 <= len(mats) <= MAX_MOMENT_ORDER:
        raise InputError(
            f"need between 1 and {MAX_MOMENT_ORDER} operators, got {len(mats)}"
        )
    dim = mats[0].shape[0]
    for m in mats[1:]:
        if m.shape[0] != dim:
            raise InputError("all operators must share one dimension")
    return mats, dim


def haar_moment_lhs(ops, samples: int, seed) -> MomentEstimate:
    """Monte Carlo Haar average of the product <A>_psi <B>_psi ...

    The standard error is that of the complex sample mean,
    sqrt((var(Re) + var(Im)) / M).
    """
    mats, dim = _check_moment_ops(ops)
    if samples < 2:
        raise InputError(f"samples must be >= 2, got {samples}")
    psi = HaarSampler(dim, seed).states(samples)
    product = np.ones(samples, dtype=np.complex128)
    for m in mats:
        product *= np.einsum("im,ij,jm->m", psi.conj(), m, psi)
    value = product.mean()
    stderr = np.sqrt(
        (product.real.var(ddof=1) + product.imag.var(ddof=1)) / samples
    )
    return MomentEstimate(value=complex(value), stderr=float(stderr),
                          samples=samples)


def haar_moment_rhs(ops) -> complex:
    """Exact Haar average of <A>_psi <B>_psi ... via the symmetric projector:
    Tr{(A (x) B (x) ...) P_S} / binomial(N + ell - 1, ell)."""
    mats, dim = _check_moment_ops(ops)
    ell = len(mats)
    projector = linalg.symmetric_projector(dim, ell)
    product = linalg.kron_all(mats)
    return complex(np.trace(product @ projector)
                   / linalg.symmetric_subspace_dim(dim, ell))


def two_point_haar_moment(a: np.ndarray, b: np.ndarray) -> complex:
    """Closed form of the ell = 2 Haar moment:
    (Tr A Tr B + Tr AB) / (N^2 + N)."""
    ma, mb = linalg.require_square(a), linalg.require_square(b)
    if ma.shape != mb.shape:
        raise InputError("operators must share one dimension")
    dim = ma.shape[0]
    return complex(
        (np.trace(ma) * np.trace(mb) + np.trace(ma @ mb)) / (dim ** 2 + dim)
    )
