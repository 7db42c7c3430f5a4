"""Problem data model: instances, uncertainty specifications, I/O, generation.

An instance describes a workforce routing problem: a set of jobs reachable
from a depot (node 0), a pool of multi-skilled employees, per-job headcount
requirements over skill/level cells, travel and processing times, and a
working-time horizon shared by all teams.

The random generator reproduces the shape of the benchmark instances used in
the accompanying experiments (3 skills x 3 levels, 540-minute horizon,
Euclidean travel times); the exact published distributions are not public,
so the defaults here are documented choices, not a file-format port.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class ValidationError(ValueError):
    """Raised when instance or uncertainty data violates a structural rule."""


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Instance:
    """Immutable problem instance.

    Jobs are numbered 1..n_jobs; node 0 is the depot. ``travel`` is indexed
    over depot+jobs, ``processing`` over jobs only (entry j-1 for job j).
    ``requirements[j-1, k, l]`` is the number of employees with skill k at
    level l that job j demands; ``qualifications[m, k, l]`` is 1 if employee
    m holds that skill/level. Levels are not hierarchical: a level-3
    qualification does not count toward level-1 demand.
    """

    travel: np.ndarray          # (n_jobs+1, n_jobs+1) minutes, row/col 0 = depot
    processing: np.ndarray      # (n_jobs,) minutes
    requirements: np.ndarray    # (n_jobs, n_skills, n_levels) headcounts
    qualifications: np.ndarray  # (n_employees, n_skills, n_levels) binary
    e_max: float                # working-time horizon in minutes
    name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "travel", _freeze(np.asarray(self.travel, dtype=float)))
        object.__setattr__(self, "processing", _freeze(np.asarray(self.processing, dtype=float)))
        object.__setattr__(self, "requirements", _freeze(np.asarray(self.requirements, dtype=int)))
        object.__setattr__(self, "qualifications", _freeze(np.asarray(self.qualifications, dtype=int)))
        self._validate()

    @property
    def n_jobs(self) -> int:
        return self.requirements.shape[0]

    @property
    def n_employees(self) -> int:
        return self.qualifications.shape[0]

    @property
    def n_skills(self) -> int:
        return self.requirements.shape[1]

    @property
    def n_levels(self) -> int:
        return self.requirements.shape[2]

    @property
    def team_bound(self) -> int:
        """Maximum number of teams: min(|employees|, |jobs|), always recomputed."""
        return min(self.n_employees, self.n_jobs)

    @property
    def jobs(self) -> range:
        """Job indices 1..n_jobs (0 is the depot)."""
        return range(1, self.n_jobs + 1)

    @property
    def nodes(self) -> range:
        """Depot plus jobs: 0..n_jobs."""
        return range(self.n_jobs + 1)

    def _validate(self) -> None:
        if self.requirements.ndim != 3:
            raise ValidationError(f"requirements: expected a 3-d tensor, got {self.requirements.ndim}-d")
        if self.qualifications.ndim != 3:
            raise ValidationError(f"qualifications: expected a 3-d tensor, got {self.qualifications.ndim}-d")
        n, ks, ls = self.requirements.shape
        if n < 1:
            raise ValidationError("requirements: need at least one job")
        if self.qualifications.shape[0] < 1:
            raise ValidationError("qualifications: need at least one employee")
        if self.qualifications.shape[1:] != (ks, ls):
            raise ValidationError(
                f"qualifications: skill/level shape {self.qualifications.shape[1:]} "
                f"does not match requirements {(ks, ls)}"
            )
        if self.travel.shape != (n + 1, n + 1):
            raise ValidationError(f"travel: expected shape {(n + 1, n + 1)}, got {self.travel.shape}")
        if self.processing.shape != (n,):
            raise ValidationError(f"processing: expected shape {(n,)}, got {self.processing.shape}")
        if not np.all(np.isfinite(self.travel)):
            raise ValidationError("travel: entries must be finite")
        if not np.all(np.isfinite(self.processing)):
            raise ValidationError("processing: entries must be finite")
        if np.any(self.travel < 0):
            raise ValidationError("travel: entries must be nonnegative")
        if np.any(np.diag(self.travel) != 0):
            raise ValidationError("travel: diagonal must be zero")
        if np.any(self.processing < 0):
            raise ValidationError("processing: entries must be nonnegative")
        if np.any(self.requirements < 0):
            raise ValidationError("requirements: entries must be nonnegative")
        if not np.isin(self.qualifications, (0, 1)).all():
            raise ValidationError("qualifications: entries must be 0 or 1")
        if not (np.isfinite(self.e_max) and self.e_max >= 0):
            raise ValidationError("e_max: must be finite and nonnegative")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.e_max == other.e_max
            and np.array_equal(self.travel, other.travel)
            and np.array_equal(self.processing, other.processing)
            and np.array_equal(self.requirements, other.requirements)
            and np.array_equal(self.qualifications, other.qualifications)
        )

    def to_dict(self) -> dict:
        return {
            "n_jobs": self.n_jobs,
            "n_employees": self.n_employees,
            "n_skills": self.n_skills,
            "n_levels": self.n_levels,
            "e_max": self.e_max,
            "travel": self.travel.tolist(),
            "processing": self.processing.tolist(),
            "requirements": self.requirements.tolist(),
            "qualifications": self.qualifications.tolist(),
        }


@dataclass(frozen=True, eq=False)
class UncertaintySpec:
    """Demand-deviation data attached to an instance.

    ``r_hat[j-1, k, l]`` is the maximal upward deviation of requirement cell
    (j, k, l). ``gamma_job`` caps, per job, how many cells may deviate at
    once; ``gamma_global`` is the adversary's budget for cost-weighted
    increases across all jobs, priced by ``costs`` per unit increase.
    """

    r_hat: np.ndarray   # (n_jobs, n_skills, n_levels) max deviations
    costs: np.ndarray   # (n_jobs, n_skills, n_levels) unit-increase costs, >= 1
    gamma_job: int      # per-job deviation-cell budget
    gamma_global: int   # global adversary budget

    def __post_init__(self) -> None:
        object.__setattr__(self, "r_hat", _freeze(np.asarray(self.r_hat, dtype=int)))
        object.__setattr__(self, "costs", _freeze(np.asarray(self.costs, dtype=int)))
        if self.r_hat.ndim != 3:
            raise ValidationError(f"r_hat: expected a 3-d tensor, got {self.r_hat.ndim}-d")
        if self.costs.shape != self.r_hat.shape:
            raise ValidationError(f"costs: shape {self.costs.shape} does not match r_hat {self.r_hat.shape}")
        if np.any(self.r_hat < 0):
            raise ValidationError("r_hat: entries must be nonnegative")
        if np.any(self.costs < 1):
            raise ValidationError("costs: entries must be >= 1")
        cells = self.r_hat.shape[1] * self.r_hat.shape[2]
        if not 0 <= self.gamma_job <= cells:
            raise ValidationError(f"gamma_job: must lie in [0, {cells}], got {self.gamma_job}")
        if self.gamma_global < 0:
            raise ValidationError(f"gamma_global: must be nonnegative, got {self.gamma_global}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, UncertaintySpec):
            return NotImplemented
        return (
            self.gamma_job == other.gamma_job
            and self.gamma_global == other.gamma_global
            and np.array_equal(self.r_hat, other.r_hat)
            and np.array_equal(self.costs, other.costs)
        )

    def to_dict(self) -> dict:
        return {
            "r_hat": self.r_hat.tolist(),
            "gamma_job": self.gamma_job,
            "gamma_global": self.gamma_global,
            "costs": self.costs.tolist(),
        }


@dataclass(frozen=True)
class GenerationConfig:
    """Knobs for the random instance generator.

    Defaults reproduce the benchmark shape: 3x3 skill/level grid, 540-minute
    horizon, jobs scattered uniformly on a 100x100 map with the depot at the
    center, integer processing times of 30-120 minutes. Requirement cells
    take value 0/1/2 with probabilities ``req_probs``; each qualification
    cell is held with probability ``qual_density``.
    """

    n_skills: int = 3
    n_levels: int = 3
    e_max: float = 540.0
    map_size: float = 100.0
    processing_min: int = 30
    processing_max: int = 120
    req_probs: tuple[float, float, float] = (0.5, 0.35, 0.15)
    qual_density: float = 0.4


def generate_instance(
    n_jobs: int,
    n_employees: int,
    seed: int,
    params: GenerationConfig | None = None,
) -> Instance:
    """Generate a random instance; a deterministic function of ``seed``.

    Coordinates are drawn uniformly on a square map with the depot at the
    center, and travel times are Euclidean distances rounded up to whole
    minutes, so the triangle inequality is preserved exactly.
    """
    if n_jobs < 1 or n_employees < 1:
        raise ValueError("need at least one job and one employee")
    cfg = params or GenerationConfig()
    rng = np.random.default_rng(seed)

    coords = np.empty((n_jobs + 1, 2))
    coords[0] = (cfg.map_size / 2, cfg.map_size / 2)
    coords[1:] = rng.uniform(0.0, cfg.map_size, size=(n_jobs, 2))
    delta = coords[:, None, :] - coords[None, :, :]
    travel = np.ceil(np.hypot(delta[..., 0], delta[..., 1]))
    np.fill_diagonal(travel, 0.0)

    processing = rng.integers(cfg.processing_min, cfg.processing_max + 1, size=n_jobs).astype(float)
    requirements = rng.choice(
        len(cfg.req_probs), size=(n_jobs, cfg.n_skills, cfg.n_levels), p=cfg.req_probs
    )
    qualifications = (rng.random((n_employees, cfg.n_skills, cfg.n_levels)) < cfg.qual_density).astype(int)

    return Instance(
        travel=travel,
        processing=processing,
        requirements=requirements,
        qualifications=qualifications,
        e_max=cfg.e_max,
        name=f"gen-{n_jobs}x{n_employees}-s{seed}",
    )


# Per-level maximal deviations and cost ranges: increasing a low-level
# requirement is likelier (larger r_hat) and cheaper than a high-level one.
_RHAT_BY_LEVEL = (2, 1, 1)
_COST_RANGES = ((1, 2), (3, 4), (5, 6))


def generate_uncertainty(
    instance: Instance,
    seed: int,
    gamma_job: int = 4,
    gamma_global: int | None = None,
) -> UncertaintySpec:
    """Generate the deviation spec for an instance; deterministic in ``seed``.

    Deviations are fixed per level (2 at level 1, otherwise 1, repeated for
    levels past the third); unit-increase costs are drawn uniformly from a
    per-level range. ``gamma_global`` defaults to 2 * n_jobs.
    """
    rng = np.random.default_rng(seed)
    n, ks, ls = instance.requirements.shape

    r_hat = np.empty((n, ks, ls), dtype=int)
    costs = np.empty((n, ks, ls), dtype=int)
    for l in range(ls):
        r_hat[:, :, l] = _RHAT_BY_LEVEL[min(l, len(_RHAT_BY_LEVEL) - 1)]
        lo, hi = _COST_RANGES[min(l, len(_COST_RANGES) - 1)]
        costs[:, :, l] = rng.integers(lo, hi + 1, size=(n, ks))

    if gamma_global is None:
        gamma_global = 2 * n
    return UncertaintySpec(
        r_hat=r_hat,
        costs=costs,
        gamma_job=min(gamma_job, ks * ls),
        gamma_global=gamma_global,
    )


def _load_json(path: str | Path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc


def _require(data: dict, key: str, path: str | Path):
    if key not in data:
        raise ValidationError(f"{path}: missing field '{key}'")
    return data[key]


def load_instance(path: str | Path) -> Instance:
    """Load and validate an instance JSON file."""
    data = _load_json(path)
    fields = {k: _require(data, k, path) for k in (
        "n_jobs", "n_employees", "n_skills", "n_levels",
        "e_max", "travel", "processing", "requirements", "qualifications",
    )}
    try:
        inst = Instance(
            travel=np.asarray(fields["travel"], dtype=float),
            processing=np.asarray(fields["processing"], dtype=float),
            requirements=np.asarray(fields["requirements"], dtype=int),
            qualifications=np.asarray(fields["qualifications"], dtype=int),
            e_max=float(fields["e_max"]),
            name=Path(path).stem,
        )
    except (ValueError, TypeError) as exc:
        raise ValidationError(f"{path}: {exc}") from exc
    for key, actual in (
        ("n_jobs", inst.n_jobs),
        ("n_employees", inst.n_employees),
        ("n_skills", inst.n_skills),
        ("n_levels", inst.n_levels),
    ):
        if fields[key] != actual:
            raise ValidationError(f"{path}: {key}={fields[key]} does not match tensor shape ({actual})")
    return inst


def save_instance(instance: Instance, path: str | Path) -> None:
    """Write an instance as JSON (stable key order, byte-deterministic)."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance.to_dict(), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_uncertainty(path: str | Path) -> UncertaintySpec:
    """Load and validate an uncertainty JSON file."""
    data = _load_json(path)
    fields = {k: _require(data, k, path) for k in ("r_hat", "gamma_job", "gamma_global", "costs")}
    try:
        return UncertaintySpec(
            r_hat=np.asarray(fields["r_hat"], dtype=int),
            costs=np.asarray(fields["costs"], dtype=int),
            gamma_job=int(fields["gamma_job"]),
            gamma_global=int(fields["gamma_global"]),
        )
    except (ValueError, TypeError) as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def save_uncertainty(unc: UncertaintySpec, path: str | Path) -> None:
    """Write an uncertainty spec as JSON (stable key order)."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(unc.to_dict(), fh, indent=1, sort_keys=True)
        fh.write("\n")
