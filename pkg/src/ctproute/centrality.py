"""Edge importance under uncertainty.

The blockage centrality of an edge is the rise in the optimal traveler's
expected time caused by that edge being blocked rather than open:

    cbc(e) = E[T | e blocked] - E[T | e open]

The traveler's policy is always built from the nominal probabilities and
never pre knows e's state; conditioning enters only through the realized
world, so the policy discovers the forced state on arrival like any
other observation. Whether the other edges stay random or are forced
open is the analyst's choice (the mode).

A deterministic geodesic edge betweenness is included as a baseline:
over unordered node pairs, the fraction of minimum cost paths through
each edge, with equal splitting across ties and no normalization.
"""

from __future__ import annotations

import csv
import heapq
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import rng
from .blockage import BlockageModel, EdgeState
from .errors import (
    IncompatibleOptions,
    UnknownEdge,
    ValidationError,
)
from .network import RoadNetwork
from .render import fmt
from .traveler import (
    DEFAULT_UNCERTAIN_EDGE_CAP,
    OptimalPolicy,
    default_failure_cost,
    evaluate_policy_exact,
    simulate_policy,
)

MODES = ("others_stochastic", "others_open")
METHODS = ("exact", "monte_carlo")
FAILURE_HANDLING = ("penalty", "conditional")


@dataclass(frozen=True)
class CbcResult:
    edge_id: str
    mode: str
    method: str
    e_t_blocked: float
    e_t_open: float
    cbc: float
    p_fail_blocked: float
    p_fail_open: float
    se_blocked: Optional[float] = None
    se_open: Optional[float] = None
    replications: Optional[int] = None


@dataclass(frozen=True)
class GeodesicScore:
    edge_id: str
    score: float


@dataclass(frozen=True)
class CentralityTable:
    rows: tuple[Union[CbcResult, GeodesicScore], ...]
    source: Optional[str] = None
    sink: Optional[str] = None
    config: dict = field(default_factory=dict)


def _conditioned_model(
    net: RoadNetwork, model: BlockageModel, edge_id: str, mode: str
) -> BlockageModel:
    """Model seen by both the policy and the dynamics under a mode."""
    if mode == "others_stochastic":
        return model
    return BlockageModel(
        probabilities={
            e.id: model.probability(e.id) if e.id == edge_id else 0.0
            for e in net.edges
        }
    )


def _validate_options(mode: str, method: str, failure_handling: str) -> None:
    if mode not in MODES:
        raise ValidationError(f"unknown mode {mode!r}")
    if method not in METHODS:
        raise ValidationError(f"unknown method {method!r}")
    if failure_handling not in FAILURE_HANDLING:
        raise ValidationError(f"unknown failure handling {failure_handling!r}")
    if failure_handling == "conditional" and method == "exact":
        raise IncompatibleOptions(
            "conditional failure handling requires the monte_carlo method"
        )


def _conditional_stats(dist) -> tuple[float, float]:
    ok = dist.times[~dist.failed]
    if ok.size == 0:
        return math.nan, 0.0
    mean = float(np.mean(ok))
    se = float(np.std(ok, ddof=1) / math.sqrt(ok.size)) if ok.size > 1 else 0.0
    return mean, se


def canadian_betweenness(
    net: RoadNetwork,
    model: BlockageModel,
    source: str,
    sink: str,
    edge_id: str,
    mode: str = "others_stochastic",
    method: str = "exact",
    replications: int = 10000,
    seed: int = 0,
    failure_cost: Optional[float] = None,
    failure_handling: str = "penalty",
    uncertain_edge_cap: int = DEFAULT_UNCERTAIN_EDGE_CAP,
    _policy: Optional[OptimalPolicy] = None,
) -> CbcResult:
    """Blockage centrality of one edge between a source and sink."""
    _validate_options(mode, method, failure_handling)
    model.validate_for(net)
    if edge_id not in net.edge_by_id:
        raise UnknownEdge(f"unknown edge {edge_id!r}")
    net.require_node(source)
    net.require_node(sink)
    if source == sink:
        raise ValidationError("source and sink must differ")
    if failure_cost is None:
        failure_cost = default_failure_cost(net)
    cond = _conditioned_model(net, model, edge_id, mode)
    policy = _policy
    if policy is None or mode == "others_open":
        policy = OptimalPolicy(net, cond, sink, failure_cost, uncertain_edge_cap)

    if method == "exact":
        blocked = evaluate_policy_exact(
            net, cond, policy, source, sink, failure_cost,
            overrides={edge_id: EdgeState.BLOCKED},
            uncertain_edge_cap=uncertain_edge_cap,
        )
        opened = evaluate_policy_exact(
            net, cond, policy, source, sink, failure_cost,
            overrides={edge_id: EdgeState.OPEN},
            uncertain_edge_cap=uncertain_edge_cap,
        )
        return CbcResult(
            edge_id=edge_id,
            mode=mode,
            method=method,
            e_t_blocked=blocked.value,
            e_t_open=opened.value,
            cbc=blocked.value - opened.value,
            p_fail_blocked=blocked.failure_probability,
            p_fail_open=opened.failure_probability,
        )

    stats: dict[str, tuple[float, float, float]] = {}
    for label, state in (("blocked", EdgeState.BLOCKED), ("open", EdgeState.OPEN)):
        # independent substream per (edge, conditioning); replicates split inside
        run_seed = rng.derive_seed(seed, edge_id, label)
        dist = simulate_policy(
            net, cond, policy, source, sink, replications, run_seed,
            failure_cost, overrides={edge_id: state},
        )
        if failure_handling == "penalty":
            stats[label] = (dist.mean, dist.stderr, dist.failure_frequency)
        else:
            mean, se = _conditional_stats(dist)
            stats[label] = (mean, se, dist.failure_frequency)
    (bv, bse, bf), (ov, ose, of) = stats["blocked"], stats["open"]
    return CbcResult(
        edge_id=edge_id,
        mode=mode,
        method=method,
        e_t_blocked=bv,
        e_t_open=ov,
        cbc=bv - ov,
        p_fail_blocked=bf,
        p_fail_open=of,
        se_blocked=bse,
        se_open=ose,
        replications=replications,
    )


def canadian_betweenness_all(
    net: RoadNetwork,
    model: BlockageModel,
    source: str,
    sink: str,
    mode: str = "others_stochastic",
    method: str = "exact",
    replications: int = 10000,
    seed: int = 0,
    failure_cost: Optional[float] = None,
    failure_handling: str = "penalty",
    uncertain_edge_cap: int = DEFAULT_UNCERTAIN_EDGE_CAP,
) -> CentralityTable:
    """Blockage centrality for every edge, rows in edge id order."""
    _validate_options(mode, method, failure_handling)
    model.validate_for(net)
    if failure_cost is None:
        failure_cost = default_failure_cost(net)
    shared = None
    if mode == "others_stochastic":
        # one nominal policy serves every edge in this mode
        shared = OptimalPolicy(net, model, sink, failure_cost, uncertain_edge_cap)
    rows = tuple(
        canadian_betweenness(
            net, model, source, sink, edge_id,
            mode=mode, method=method, replications=replications, seed=seed,
            failure_cost=failure_cost, failure_handling=failure_handling,
            uncertain_edge_cap=uncertain_edge_cap, _policy=shared,
        )
        for edge_id in sorted(net.edge_by_id)
    )
    config = {
        "source": source,
        "sink": sink,
        "mode": mode,
        "method": method,
        "failure_handling": failure_handling,
        "failure_cost": failure_cost,
        "seed": seed,
        "replications": replications if method == "monte_carlo" else None,
    }
    return CentralityTable(rows=rows, source=source, sink=sink, config=config)


def geodesic_scores(net: RoadNetwork) -> dict[str, float]:
    """Raw geodesic betweenness per edge.

    Undirected networks count each unordered node pair once; directed
    networks count ordered pairs. Equal cost ties split the pair's unit
    of weight evenly across all minimum cost paths, counted as edge
    sequences so parallel edges are distinct paths. Disconnected pairs
    contribute nothing, which makes the score per component.
    """
    scores = {e.id: 0.0 for e in net.edges}
    for s in net.nodes:
        dist = {s: 0.0}
        heap: list[tuple[float, str]] = [(0.0, s)]
        done: set[str] = set()
        order: list[str] = []
        while heap:
            d, node = heapq.heappop(heap)
            if node in done:
                continue
            done.add(node)
            order.append(node)
            for e in net.outgoing[node]:
                other = e.other(node)
                nd = d + e.cost
                if nd < dist.get(other, math.inf):
                    dist[other] = nd
                    heapq.heappush(heap, (nd, other))

        # path counts in increasing distance order; costs are positive so
        # equal distance nodes never feed each other
        sigma = {node: 0.0 for node in order}
        sigma[s] = 1.0
        preds: dict[str, list[tuple[str, str]]] = {node: [] for node in order}
        for node in order:
            if node == s:
                continue
            for e in net.incident[node]:
                tail = e.other(node)
                if net.directed and e.v != node:
                    continue
                if tail not in dist:
                    continue
                if dist[tail] + e.cost == dist[node]:
                    preds[node].append((tail, e.id))
                    sigma[node] += sigma[tail]

        delta = {node: 0.0 for node in order}
        for node in reversed(order):
            if node == s:
                continue
            for tail, edge_id in preds[node]:
                contribution = sigma[tail] / sigma[node] * (1.0 + delta[node])
                scores[edge_id] += contribution
                delta[tail] += contribution
    if not net.directed:
        scores = {e: v / 2.0 for e, v in scores.items()}
    return scores


def geodesic_edge_betweenness(net: RoadNetwork) -> CentralityTable:
    scores = geodesic_scores(net)
    rows = tuple(
        GeodesicScore(edge_id=e, score=scores[e]) for e in sorted(scores)
    )
    return CentralityTable(rows=rows, config={"baseline": "geodesic"})


CSV_HEADER = (
    "edge_id,mode,method,e_t_blocked,e_t_open,cbc,"
    "p_fail_blocked,p_fail_open,se_blocked,se_open"
)


def write_centrality_csv(
    table: CentralityTable, geodesic: Optional[dict[str, float]] = None
) -> str:
    """Render a CBC table as CSV, 12 significant digits, edge id order.

    Standard error columns are empty for the exact method. When a
    geodesic baseline map is supplied it is appended as a final column.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = CSV_HEADER.split(",")
    if geodesic is not None:
        header.append("geodesic")
    writer.writerow(header)
    for row in table.rows:
        if not isinstance(row, CbcResult):
            raise ValidationError("CSV output expects blockage centrality rows")
        record = [
            row.edge_id,
            row.mode,
            row.method,
            fmt(row.e_t_blocked),
            fmt(row.e_t_open),
            fmt(row.cbc),
            fmt(row.p_fail_blocked),
            fmt(row.p_fail_open),
            "" if row.se_blocked is None else fmt(row.se_blocked),
            "" if row.se_open is None else fmt(row.se_open),
        ]
        if geodesic is not None:
            if row.edge_id not in geodesic:
                raise UnknownEdge(f"no geodesic score for edge {row.edge_id!r}")
            record.append(fmt(geodesic[row.edge_id]))
        writer.writerow(record)
    return buf.getvalue()
