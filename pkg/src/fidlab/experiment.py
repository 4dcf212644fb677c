"""Experiment runner: configuration, estimator sweeps, decay fits, and
machine-readable outputs (CSV series plus JSON sidecar)."""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import dqc1, fidelity, linalg, spinsys
from .errors import ConfigError, InputError, VerificationError

CSV_HEADER = "n,exact,mc_mean,mc_stderr,dqc1_mean,dqc1_stderr"
ESTIMATORS = ("exact", "mc", "dqc1")
GENERATORS = ("register_z", "collective_z")

# Derived seed streams: each consumer owns an independent stream keyed by
# (root seed, stream index), so estimators can run in any order or in
# parallel without perturbing each other's draws.
STREAM_MC = 1
STREAM_DQC1 = 2
STREAM_SYSTEM = 3


@dataclass(frozen=True)
class SystemConfig:
    kind: str = "kicked_top"
    j: float = 31.5
    k: float = 12.0
    dim: int | None = None
    seed: int | None = None


@dataclass(frozen=True)
class PerturbationConfig:
    delta: float = 0.1
    generator: str = "register_z"


@dataclass(frozen=True)
class MCConfig:
    samples: int = 50
    sampler: str = "basis"


@dataclass(frozen=True)
class DQC1Section:
    gamma: float = 1.0
    shots: int = 100_000
    readout_noise_sd: float = 0.0


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemConfig = field(default_factory=SystemConfig)
    perturbation: PerturbationConfig = field(default_factory=PerturbationConfig)
    n_max: int = 100
    estimators: tuple[str, ...] = ("exact", "mc")
    mc: MCConfig = field(default_factory=MCConfig)
    dqc1: DQC1Section = field(default_factory=DQC1Section)
    seed: int = 0
    output: str | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["estimators"] = list(self.estimators)
        return d


def _section(cls, data: dict, name: str):
    if not isinstance(data, dict):
        raise ConfigError(f"section {name!r} must be an object")
    fields = {f.name for f in cls.__dataclass_fields__.values()}
    unknown = set(data) - fields
    if unknown:
        raise ConfigError(f"unknown keys in {name!r}: {sorted(unknown)}")
    return cls(**data)


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build and validate an :class:`ExperimentConfig` from a plain dict.

    A sidecar document (with the config nested under a ``"config"`` key) is
    accepted as well, so a run can be reproduced from its own sidecar.
    """
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    if "config" in data and isinstance(data["config"], dict):
        data = data["config"]
    known = {"system", "perturbation", "n_max", "estimators", "mc", "dqc1",
             "seed", "output"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    cfg = ExperimentConfig(
        system=_section(SystemConfig, data.get("system", {}), "system"),
        perturbation=_section(PerturbationConfig, data.get("perturbation", {}),
                              "perturbation"),
        n_max=int(data.get("n_max", 100)),
        estimators=tuple(data.get("estimators", ["exact", "mc"])),
        mc=_section(MCConfig, data.get("mc", {}), "mc"),
        dqc1=_section(DQC1Section, data.get("dqc1", {}), "dqc1"),
        seed=int(data.get("seed", 0)),
        output=data.get("output"),
    )
    validate_config(cfg)
    return cfg


def validate_config(cfg: ExperimentConfig) -> None:
    sys_cfg = cfg.system
    if sys_cfg.kind == "kicked_top":
        if sys_cfg.j is None or sys_cfg.j <= 0 or abs(2 * sys_cfg.j - round(2 * sys_cfg.j)) > 1e-9:
            raise ConfigError(f"kicked_top requires a positive half-integer j, got {sys_cfg.j}")
        if sys_cfg.k is None:
            raise ConfigError("kicked_top requires a kick strength k")
    elif sys_cfg.kind == "random_unitary":
        if sys_cfg.dim is None or sys_cfg.dim < 2:
            raise ConfigError("random_unitary requires dim >= 2")
    else:
        raise ConfigError(f"unknown system kind {sys_cfg.kind!r}")
    gen = cfg.perturbation.generator
    if gen not in GENERATORS and not os.path.exists(gen):
        raise ConfigError(
            f"generator must be one of {GENERATORS} or an existing file, got {gen!r}"
        )
    if cfg.n_max < 0:
        raise ConfigError(f"n_max must be >= 0, got {cfg.n_max}")
    if not cfg.estimators:
        raise ConfigError("at least one estimator must be selected")
    unknown = set(cfg.estimators) - set(ESTIMATORS)
    if unknown:
        raise ConfigError(f"unknown estimators: {sorted(unknown)}")
    if "mc" in cfg.estimators:
        if cfg.mc.samples < 2:
            raise ConfigError("mc.samples must be >= 2")
        if cfg.mc.sampler not in ("haar", "basis"):
            raise ConfigError(f"mc.sampler must be 'haar' or 'basis', got {cfg.mc.sampler!r}")
    if "dqc1" in cfg.estimators:
        if not 0.0 < cfg.dqc1.gamma <= 1.0:
            raise ConfigError("dqc1.gamma must lie in (0, 1]")
        if cfg.dqc1.shots < 1:
            raise ConfigError("dqc1.shots must be >= 1")
        if cfg.dqc1.readout_noise_sd < 0:
            raise ConfigError("dqc1.readout_noise_sd must be >= 0")


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return config_from_dict(data)


def load_generator_file(path: str) -> np.ndarray:
    """Load a Hermitian generator from JSON: rows of [re, im] entry pairs."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read generator file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"generator file {path} is not valid JSON: {exc}") from exc
    try:
        rows = [[complex(re, im) for re, im in row] for row in data]
        mat = np.array(rows, dtype=np.complex128)
    except (TypeError, ValueError) as exc:
        raise ConfigError(
            f"generator file {path} must hold rows of [re, im] pairs: {exc}"
        ) from exc
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ConfigError(f"generator in {path} is not a square matrix")
    if not linalg.is_hermitian(mat):
        raise ConfigError(f"generator in {path} is not Hermitian")
    return mat


def build_map_pair(cfg: ExperimentConfig) -> spinsys.MapPair:
    """Construct the (U, U_p) pair described by a configuration."""
    sys_cfg = cfg.system
    if sys_cfg.kind == "kicked_top":
        top = spinsys.kicked_top(sys_cfg.j, sys_cfg.k)
        u = spinsys.kicked_top_unitary(top)
        dim = top.dim
    else:
        dim = int(sys_cfg.dim)
        seed = sys_cfg.seed if sys_cfg.seed is not None else [cfg.seed, STREAM_SYSTEM]
        u = fidelity.haar_unitary(dim, seed)
    gen_name = cfg.perturbation.generator
    delta = cfg.perturbation.delta
    if gen_name == "register_z":
        if dim & (dim - 1):
            raise ConfigError(
                f"register_z requires a power-of-two dimension, got {dim}"
            )
        spec = spinsys.register_rotation_perturbation(dim, delta)
    elif gen_name == "collective_z":
        spec = spinsys.PerturbationSpec(delta=delta,
                                        generator_v=spinsys.spin_z_generator(dim))
    else:
        mat = load_generator_file(gen_name)
        if mat.shape[0] != dim:
            raise ConfigError(
                f"generator dimension {mat.shape[0]} does not match system "
                f"dimension {dim}"
            )
        spec = spinsys.PerturbationSpec(delta=delta, generator_v=mat)
    return spinsys.make_map_pair(u, spec)


@dataclass(frozen=True)
class DecayFit:
    """Least-squares exponential fit F ~ exp(-gamma n) over a window.

    When ``background`` is nonzero the fit is performed on
    log(F - background), which de-biases the rate when the series saturates
    well above zero.
    """

    gamma: float
    window: tuple[int, int]
    residual_rms: float
    background: float = 0.0
    model: str = "F = exp(-gamma * n)"


def default_fit_window(n: np.ndarray, f: np.ndarray, dim: int,
                       background: float = 0.0) -> tuple[int, int]:
    """Window for the exponential fit.

    Starts once the series has left the short-time transient (first step with
    F <= 0.9) and ends where the series approaches saturation: with no
    background, at the first step below 3x the asymptotic floor; with a
    background estimate b, at the first step whose excess F - b falls below
    2b.
    """
    floor = fidelity.saturation_floor(dim)
    start_hits = np.nonzero(f <= 0.9)[0]
    lo = int(n[start_hits[0]]) if len(start_hits) else int(n[0]) + 1
    if background > 0.0:
        end_level = background + 2.0 * background
    else:
        end_level = 3.0 * floor
    end_hits = np.nonzero(f <= end_level)[0]
    hi = int(n[end_hits[0]] - 1) if len(end_hits) else int(n[-1])
    return lo, hi


def fgr_background(dim: int) -> float:
    """Saturation background used by the decay-rate reproduction: 3x floor."""
    return 3.0 * fidelity.saturation_floor(dim)


def fit_decay(series: fidelity.FidelitySeries,
              window: tuple[int, int] | None = None,
              background: float = 0.0,
              column: str = "exact") -> DecayFit:
    """Fit log(F - background) = a - gamma n by least squares over a window.

    Raises
    ------
    InputError
        If the requested column is absent, the window is empty, or the
        series is not positive (after background subtraction) on the window;
        shrink the window in that case.
    """
    values = getattr(series, column if column == "exact" else column + "_mean")
    if values is None:
        raise InputError(f"series has no {column!r} values to fit")
    n = np.asarray(series.n)
    if window is None:
        window = default_fit_window(n, values, series.dim, background)
    lo, hi = int(window[0]), int(window[1])
    mask = (n >= lo) & (n <= hi)
    if mask.sum() < 2:
        raise InputError(f"fit window [{lo}, {hi}] selects fewer than 2 points")
    x = n[mask].astype(float)
    y = values[mask] - background
    if np.any(y <= 0):
        raise InputError(
            f"series is not positive on [{lo}, {hi}] after subtracting "
            f"background {background}; shrink the window"
        )
    logy = np.log(y)
    design = np.column_stack([np.ones_like(x), -x])
    coef, *_ = np.linalg.lstsq(design, logy, rcond=None)
    resid = logy - design @ coef
    return DecayFit(
        gamma=float(coef[1]),
        window=(lo, hi),
        residual_rms=float(np.sqrt(np.mean(resid ** 2))),
        background=background,
    )


def _merge_series(dim: int, n_max: int, parts: dict) -> fidelity.FidelitySeries:
    merged = fidelity.FidelitySeries(n=np.arange(n_max + 1), dim=dim)
    for series in parts.values():
        for name in ("exact", "mc_mean", "mc_stderr", "dqc1_mean", "dqc1_stderr"):
            value = getattr(series, name)
            if value is not None:
                setattr(merged, name, value)
    if "mc" in parts:
        merged.sample_count = parts["mc"].sample_count
    return merged


def _format_value(x: float | None) -> str:
    return "" if x is None else f"{x:.17g}"


def series_to_csv(series: fidelity.FidelitySeries) -> str:
    """Render a series as CSV with 17 significant digits and LF endings."""
    columns = [series.exact, series.mc_mean, series.mc_stderr,
               series.dqc1_mean, series.dqc1_stderr]
    lines = [CSV_HEADER]
    for i, n in enumerate(series.n):
        row = [str(int(n))]
        row += [_format_value(None if col is None else float(col[i]))
                for col in columns]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


@dataclass(frozen=True)
class RunResult:
    series: fidelity.FidelitySeries
    csv_path: str
    sidecar_path: str
    fit: DecayFit | None


def sidecar_path_for(csv_path: str) -> str:
    root, _ = os.path.splitext(csv_path)
    return root + ".json"


def run_experiment(cfg: ExperimentConfig) -> RunResult:
    """Execute the configured estimators and write CSV + JSON sidecar.

    Deterministic under a fixed seed: derived streams [seed, 1] (Monte
    Carlo), [seed, 2] (probe readout), [seed, 3] (random system) decouple the
    estimators.  Files are written to a temporary name and atomically
    renamed, so an interrupt never leaves a partial file.
    """
    validate_config(cfg)
    if not cfg.output:
        raise ConfigError("config has no output path")
    pair = build_map_pair(cfg)
    parts: dict[str, fidelity.FidelitySeries] = {}
    if "exact" in cfg.estimators:
        parts["exact"] = fidelity.exact_fidelity_series(pair, cfg.n_max)
    if "mc" in cfg.estimators:
        parts["mc"] = fidelity.mc_average_fidelity(
            pair, cfg.n_max, cfg.mc.samples, [cfg.seed, STREAM_MC],
            sampler=cfg.mc.sampler)
    if "dqc1" in cfg.estimators:
        probe_cfg = dqc1.DQC1Config(
            gamma=cfg.dqc1.gamma, shots=cfg.dqc1.shots,
            seed=[cfg.seed, STREAM_DQC1],
            readout_noise_sd=cfg.dqc1.readout_noise_sd)
        parts["dqc1"] = dqc1.dqc1_average_fidelity(pair, cfg.n_max, probe_cfg)
    series = _merge_series(pair.dim, cfg.n_max, parts)

    fit = None
    if series.exact is not None and cfg.n_max >= 2:
        try:
            fit = fit_decay(series, background=fgr_background(pair.dim))
        except InputError:
            fit = None

    csv_path = cfg.output
    sidecar = sidecar_path_for(csv_path)
    _atomic_write(csv_path, series_to_csv(series))
    doc = {
        "config": cfg.to_dict(),
        "dim": pair.dim,
        "seeds": {
            "root": cfg.seed,
            "mc": [cfg.seed, STREAM_MC],
            "dqc1": [cfg.seed, STREAM_DQC1],
            "system": [cfg.seed, STREAM_SYSTEM],
        },
        "fit": None if fit is None else {
            "gamma": fit.gamma,
            "window": list(fit.window),
            "residual_rms": fit.residual_rms,
            "background": fit.background,
            "model": fit.model,
        },
        "outputs": {"csv": os.path.basename(csv_path)},
    }
    _atomic_write(sidecar, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return RunResult(series=series, csv_path=csv_path, sidecar_path=sidecar,
                     fit=fit)


def read_series_csv(path: str) -> fidelity.FidelitySeries:
    """Read a CSV written by :func:`run_experiment` back into a series."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read series file {path}: {exc}") from exc
    if not lines or lines[0] != CSV_HEADER:
        raise ConfigError(f"{path} does not carry the expected CSV header")
    rows = [line.split(",") for line in lines[1:] if line]
    n = np.array([int(r[0]) for r in rows])
    cols = []
    for idx in range(1, 6):
        vals = [r[idx] for r in rows]
        cols.append(None if all(v == "" for v in vals)
                    else np.array([float(v) for v in vals]))
    sidecar = sidecar_path_for(path)
    dim = 0
    if os.path.exists(sidecar):
        with open(sidecar, encoding="utf-8") as fh:
            dim = int(json.load(fh).get("dim", 0))
    return fidelity.FidelitySeries(
        n=n, dim=dim, exact=cols[0], mc_mean=cols[1], mc_stderr=cols[2],
        dqc1_mean=cols[3], dqc1_stderr=cols[4])


@dataclass(frozen=True)
class TheoremTrial:
    trial: int
    lhs: complex
    rhs: complex
    stderr: float
    deviation: float
    passed: bool


@dataclass(frozen=True)
class TheoremReport:
    """Per-trial comparison of the Monte Carlo and exact Haar moments."""

    ell: int
    dim: int
    samples: int
    trials: tuple[TheoremTrial, ...]
    closed_form_residual: float | None
    passed: bool


def verify_theorem(ell: int, dim: int, trials: int, samples: int,
                   seed: int = 0) -> TheoremReport:
    """Check the Haar-moment identity on random operator draws.

    Each trial draws ``ell`` complex Ginibre operators, compares the Monte
    Carlo average of the product of expectation values against the exact
    symmetric-projector trace at 4x the Monte Carlo standard error, and (for
    ell = 2) against the closed two-operator trace formula.
    """
    if trials < 1:
        raise InputError(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng([seed, 17])
    rows = []
    closed_residual = None
    for trial in range(trials):
        ops = [rng.standard_normal((dim, dim))
               + 1j * rng.standard_normal((dim, dim)) for _ in range(ell)]
        estimate = fidelity.haar_moment_lhs(ops, samples, [seed, 23, trial])
        rhs = fidelity.haar_moment_rhs(ops)
        deviation = abs(estimate.value - rhs)
        rows.append(TheoremTrial(
            trial=trial, lhs=estimate.value, rhs=rhs, stderr=estimate.stderr,
            deviation=deviation, passed=deviation <= 4 * estimate.stderr))
        if ell == 2:
            closed = fidelity.two_point_haar_moment(ops[0], ops[1])
            residual = abs(closed - rhs)
            closed_residual = residual if closed_residual is None \
                else max(closed_residual, residual)
    passed = all(r.passed for r in rows)
    if closed_residual is not None:
        passed = passed and closed_residual <= 1e-10
    return TheoremReport(ell=ell, dim=dim, samples=samples,
                         trials=tuple(rows),
                         closed_form_residual=closed_residual, passed=passed)
