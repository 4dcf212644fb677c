"""Spin systems and perturbed map pairs.

Builds angular momentum generators, the kicked-top Floquet map
U = exp(-i pi Jy / 2) exp(-i k Jz^2 / j), and (U, U_p = U P) pairs with
P = exp(-i delta V) for a Hermitian generator V.

Basis convention: J_z is diagonal with eigenvalues m = +j, j-1, ..., -j
(descending), so row 0 is the maximal-weight state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import InputError


def _check_half_integer(j: float) -> float:
    two_j = 2 * j
    if abs(two_j - round(two_j)) > 1e-9 or round(two_j) < 1:
        raise InputError(f"j must be a positive half-integer, got {j}")
    return round(two_j) / 2


def angular_momentum(j: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Spin-j generators (Jx, Jy, Jz) from the ladder-operator construction.

    Satisfies [Jx, Jy] = i Jz (hbar = 1) and Jx^2 + Jy^2 + Jz^2 = j(j+1) I.
    """
    j = _check_half_integer(j)
    dim = int(round(2 * j + 1))
    m = j - np.arange(dim)
    jz = np.diag(m.astype(np.complex128))
    # J+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>; with descending basis order the
    # target |m+1> sits one row above the source column.
    src_m = m[1:]
    coeff = np.sqrt(j * (j + 1) - src_m * (src_m + 1))
    jp = np.zeros((dim, dim), dtype=np.complex128)
    jp[np.arange(dim - 1), np.arange(1, dim)] = coeff
    jm = jp.conj().T
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    return jx, jy, jz


@dataclass(frozen=True, eq=False)
class KickedTopSystem:
    """Periodically kicked spin-j top: rotation by pi/2 about y, then a
    torsion kick of strength k about z."""

    j: float
    k: float
    dim: int
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray


def kicked_top(j: float, k: float) -> KickedTopSystem:
    j = _check_half_integer(j)
    jx, jy, jz = angular_momentum(j)
    return KickedTopSystem(j=j, k=float(k), dim=int(round(2 * j + 1)),
                           jx=jx, jy=jy, jz=jz)


def kicked_top_unitary(sys: KickedTopSystem) -> np.ndarray:
    """One Floquet step U = exp(-i pi Jy / 2) exp(-i k Jz^2 / j)."""
    rotation = linalg.expm_i_hermitian(sys.jy, math.pi / 2)
    kick = linalg.expm_i_hermitian(sys.jz @ sys.jz, sys.k / sys.j)
    return rotation @ kick


@dataclass(frozen=True, eq=False)
class PerturbationSpec:
    """Strength delta (radians) and Hermitian generator V of P = exp(-i delta V)."""

    delta: float
    generator_v: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        v = linalg.require_square(self.generator_v)
        if not linalg.is_hermitian(v):
            raise InputError("perturbation generator must be Hermitian")
        object.__setattr__(self, "generator_v", v)
        object.__setattr__(self, "delta", float(self.delta))

    @property
    def dim(self) -> int:
        return self.generator_v.shape[0]


def perturbation_unitary(spec: PerturbationSpec) -> np.ndarray:
    """The perturbation map P = exp(-i delta V)."""
    return linalg.expm_i_hermitian(spec.generator_v, spec.delta)


def collective_rotation_perturbation(sys: KickedTopSystem,
                                     delta: float) -> PerturbationSpec:
    """Collective spin rotation about z: generator V = Jz.

    On the symmetric subspace of 2j qubits this equals rotating every qubit
    by delta about z.  Note the generator's variance grows like j^2, so at
    large j even small delta is a strong perturbation; see
    :func:`register_rotation_perturbation` for the log2(N)-qubit variant.
    """
    return PerturbationSpec(delta=delta, generator_v=sys.jz)


def spin_z_generator(dim: int) -> np.ndarray:
    """Jz for the spin j = (dim - 1)/2 carried by a dim-level system."""
    if dim < 2:
        raise InputError(f"dim must be >= 2, got {dim}")
    return angular_momentum((dim - 1) / 2)[2]


def register_z_generator(dim: int) -> np.ndarray:
    """Half the summed sigma_z over the log2(dim) qubits of a binary register.

    The dim basis states are labelled by their binary expansion (big-endian),
    so the generator is diagonal with entries K/2 - popcount(b) for
    K = log2(dim).  Requires dim to be a power of two.
    """
    if dim < 2 or dim & (dim - 1):
        raise InputError(
            f"register generator needs a power-of-two dimension, got {dim}"
        )
    n_qubits = dim.bit_length() - 1
    weights = np.array([n_qubits / 2 - bin(b).count("1") for b in range(dim)])
    return np.diag(weights.astype(np.complex128))


def register_rotation_perturbation(dim: int, delta: float) -> PerturbationSpec:
    """Collective rotation by delta about z of all log2(dim) register qubits.

    This is the hardware-natural perturbation for a processor that encodes
    the dim-level system in binary: a single global z pulse on every qubit.
    Its generator has variance log2(dim)/4, independent of delta, which keeps
    small delta in the weak-perturbation regime at any register size.
    """
    return PerturbationSpec(delta=delta, generator_v=register_z_generator(dim))


@dataclass(frozen=True, eq=False)
class MapPair:
    """Unperturbed step u and perturbed step u_p acting on the same space."""

    u: np.ndarray = field(repr=False)
    u_p: np.ndarray = field(repr=False)
    dim: int = 0

    def __post_init__(self) -> None:
        u = linalg.require_square(self.u)
        u_p = linalg.require_square(self.u_p)
        if u.shape != u_p.shape:
            raise InputError(
                f"map dimensions do not match: {u.shape} vs {u_p.shape}"
            )
        for name, m in (("u", u), ("u_p", u_p)):
            if not linalg.is_unitary(m):
                raise InputError(
                    f"{name} is not unitary within tolerance "
                    f"(defect {linalg.unitarity_defect(m):.3e})"
                )
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "u_p", u_p)
        object.__setattr__(self, "dim", u.shape[0])


def make_map_pair(u: np.ndarray, p_spec: PerturbationSpec) -> MapPair:
    """Pair (U, U_p = U exp(-i delta V)) from a base map and a perturbation."""
    u = linalg.require_square(u)
    if u.shape[0] != p_spec.dim:
        raise InputError(
            f"map dimension {u.shape[0]} does not match generator dimension "
            f"{p_spec.dim}"
        )
    return MapPair(u=u, u_p=u @ perturbation_unitary(p_spec))
