"""Per edge blockage probabilities and world sampling.

Each edge l is blocked independently with probability p_l. Probabilities
come from direct input or from a logistic model on edge covariates:

    log(p_l / (1 - p_l)) = sum_i Z_li * beta_i

A Realization fixes the true open or blocked state of every edge for one
draw of the world. Sampling draws one uniform per edge in model order and
only then applies overrides, so two runs that differ only in overrides
share the randomness of every other edge.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from . import rng
from .errors import (
    DimensionMismatch,
    ParseError,
    UnknownEdge,
    ValidationError,
)
from .network import RoadNetwork


class EdgeState(enum.Enum):
    OPEN = "open"
    BLOCKED = "blocked"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class CovariateMatrix:
    """Design matrix with one row per edge, in a fixed edge order."""

    values: np.ndarray
    columns: tuple[str, ...]
    edge_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 2:
            raise DimensionMismatch("covariate matrix must be two dimensional")
        n, k = values.shape
        if n == 0 or k == 0:
            raise ValidationError("covariate matrix must be non empty")
        if len(self.columns) != k:
            raise DimensionMismatch(
                f"{k} columns but {len(self.columns)} column names"
            )
        if len(self.edge_ids) != n:
            raise DimensionMismatch(f"{n} rows but {len(self.edge_ids)} edge ids")
        if len(set(self.edge_ids)) != n:
            raise ValidationError("duplicate edge id in covariate matrix")
        if not np.all(np.isfinite(values)):
            raise ValidationError("covariate matrix entries must be finite")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class BetaVector:
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size == 0:
            raise DimensionMismatch("beta must be a non empty vector")
        if not np.all(np.isfinite(values)):
            raise ValidationError("beta entries must be finite")


@dataclass(frozen=True)
class BlockageModel:
    """Blockage probability per edge id, plus optional model provenance."""

    probabilities: Mapping[str, float]
    covariates: Optional[CovariateMatrix] = None
    beta: Optional[BetaVector] = None

    def __post_init__(self) -> None:
        probs = dict(self.probabilities)
        for edge_id, p in probs.items():
            if not isinstance(p, (int, float)) or isinstance(p, bool):
                raise ValidationError(f"probability for {edge_id!r} is not a number")
            if not math.isfinite(p) or p < 0.0 or p > 1.0:
                raise ValidationError(
                    f"probability for {edge_id!r} outside [0, 1]: {p!r}"
                )
        object.__setattr__(self, "probabilities", probs)

    def probability(self, edge_id: str) -> float:
        try:
            return self.probabilities[edge_id]
        except KeyError:
            raise UnknownEdge(f"no blockage probability for edge {edge_id!r}")

    def validate_for(self, net: RoadNetwork) -> None:
        """Require exactly one probability for every edge of the network."""
        missing = [e.id for e in net.edges if e.id not in self.probabilities]
        if missing:
            raise ValidationError(f"edges without probability: {missing}")
        extra = sorted(set(self.probabilities) - set(net.edge_by_id))
        if extra:
            raise UnknownEdge(f"probabilities for unknown edges: {extra}")

    def uncertain_edges(self) -> tuple[str, ...]:
        """Edges whose state is genuinely random (0 < p < 1)."""
        return tuple(e for e, p in self.probabilities.items() if 0.0 < p < 1.0)

    def reordered(self, edge_ids: Sequence[str]) -> "BlockageModel":
        return BlockageModel(
            probabilities={e: self.probability(e) for e in edge_ids},
            covariates=self.covariates,
            beta=self.beta,
        )


@dataclass(frozen=True)
class Realization:
    """True state of every edge for one sampled world."""

    states: Mapping[str, EdgeState] = field(default_factory=dict)

    def __post_init__(self) -> None:
        states = dict(self.states)
        for edge_id, s in states.items():
            if s not in (EdgeState.OPEN, EdgeState.BLOCKED):
                raise ValidationError(
                    f"realization state for {edge_id!r} must be open or blocked"
                )
        object.__setattr__(self, "states", states)

    def state(self, edge_id: str) -> EdgeState:
        try:
            return self.states[edge_id]
        except KeyError:
            raise UnknownEdge(f"realization has no edge {edge_id!r}")


def blockage_probabilities(Z: CovariateMatrix, beta: BetaVector) -> BlockageModel:
    """Logistic model probabilities, keyed by the matrix row edge ids."""
    if Z.k != beta.values.size:
        raise DimensionMismatch(
            f"covariates have {Z.k} columns but beta has {beta.values.size} entries"
        )
    logits = Z.values @ beta.values
    # expit written to stay exact at extreme logits instead of overflowing;
    # np.where still evaluates the branch that is thrown away, so both the
    # overflow and the resulting inf/inf warnings are expected noise here
    with np.errstate(over="ignore", invalid="ignore"):
        probs = np.where(
            logits >= 0,
            1.0 / (1.0 + np.exp(-logits)),
            np.exp(logits) / (1.0 + np.exp(logits)),
        )
    return BlockageModel(
        probabilities={e: float(p) for e, p in zip(Z.edge_ids, probs)},
        covariates=Z,
        beta=beta,
    )


def sample_realization(
    model: BlockageModel,
    seed: int,
    overrides: Optional[Mapping[str, EdgeState]] = None,
    *,
    stream: int = 0,
) -> Realization:
    """Draw one world. Same (model, seed, overrides, stream) gives the
    same Realization bit for bit.

    One uniform is drawn per edge in model order before overrides are
    applied, so conditioned and unconditioned runs under one seed share
    every non overridden edge state. `stream` selects the replicate
    substream, see the rng module for the split rule.
    """
    overrides = dict(overrides or {})
    for edge_id, s in overrides.items():
        if edge_id not in model.probabilities:
            raise UnknownEdge(f"override for unknown edge {edge_id!r}")
        if s not in (EdgeState.OPEN, EdgeState.BLOCKED):
            raise ValidationError("override state must be open or blocked")
    edge_ids = list(model.probabilities)
    gen = rng.substream(seed, rng.REALIZATIONS, stream)
    uniforms = gen.random(len(edge_ids))
    states: dict[str, EdgeState] = {}
    for edge_id, u in zip(edge_ids, uniforms):
        blocked = u < model.probabilities[edge_id]
        states[edge_id] = EdgeState.BLOCKED if blocked else EdgeState.OPEN
    for edge_id, s in overrides.items():
        states[edge_id] = s
    return Realization(states=states)


def read_probabilities_csv(text: str) -> dict[str, float]:
    """Parse `edge_id,p` rows into an ordered probability map."""
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row]
    if not rows or [c.strip() for c in rows[0]] != ["edge_id", "p"]:
        raise ParseError("probabilities CSV must have header edge_id,p")
    out: dict[str, float] = {}
    for row in rows[1:]:
        if len(row) != 2:
            raise ParseError(f"bad probabilities row: {row}")
        edge_id, raw = row[0].strip(), row[1].strip()
        try:
            p = float(raw)
        except ValueError:
            raise ParseError(f"probability for {edge_id!r} is not a number: {raw!r}")
        if edge_id in out:
            raise ValidationError(f"duplicate probability row for {edge_id!r}")
        out[edge_id] = p
    return out


def read_covariates_csv(text: str) -> CovariateMatrix:
    """Parse `edge_id,<name1>,...,<namek>` rows into a CovariateMatrix."""
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row]
    if not rows:
        raise ParseError("covariates CSV is empty")
    header = [c.strip() for c in rows[0]]
    if not header or header[0] != "edge_id" or len(header) < 2:
        raise ParseError("covariates CSV must have header edge_id,<name1>,...")
    columns = tuple(header[1:])
    edge_ids: list[str] = []
    values: list[list[float]] = []
    for row in rows[1:]:
        if len(row) != len(header):
            raise ParseError(f"covariates row has {len(row)} fields, want {len(header)}")
        edge_ids.append(row[0].strip())
        try:
            values.append([float(x) for x in row[1:]])
        except ValueError:
            raise ParseError(f"non numeric covariate in row for {row[0]!r}")
    return CovariateMatrix(
        values=np.array(values, dtype=float),
        columns=columns,
        edge_ids=tuple(edge_ids),
    )
