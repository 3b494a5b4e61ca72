"""Routing a traveler who discovers blockages on arrival.

An edge's true state becomes known the first time the traveler stands at
either of its endpoints, including every edge incident to the start node
before the first move. The traveler may only traverse edges known to be
open. If the sink becomes unreachable even with every undecided edge
assumed open, failure is certain: the journey ends and the failure cost
is added on top of the travel already spent. That convention is used
consistently by the exact recursion, the exact policy evaluator, and the
Monte Carlo simulator, so their expectations are directly comparable.

The exact value is computed by expectimax over belief states (current
node, decided edge assignment). From a state the traveler either travels
to the sink along the cheapest known open path, or travels to a frontier
node (one with at least one undecided incident edge) and takes the
expectation over the joint Bernoulli reveal of that node's undecided
edges. This collapsed move set is value equivalent to stepping one edge
at a time, because optimal play only changes direction where new
information arrives. Edges with probability exactly 0 or 1 are decided
up front; the initial reveal at the start node is the zero cost frontier
move onto the start itself.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .blockage import BlockageModel, EdgeState, Realization, sample_realization
from .errors import (
    BadRoute,
    TooManyUncertainEdges,
    UnknownEdge,
    ValidationError,
)
from .network import (
    Edge,
    RoadNetwork,
    cheapest_edge,
    dijkstra_distances,
    reachable_nodes,
    shortest_path,
)

DEFAULT_UNCERTAIN_EDGE_CAP = 20


def default_failure_cost(net: RoadNetwork) -> float:
    """Twice the sum of all edge costs, above any cycle free traversal."""
    return 2.0 * net.total_cost()


@dataclass(frozen=True)
class KnowledgeState:
    """What the traveler knows: position, visited nodes, per edge state."""

    net: RoadNetwork
    current: str
    visited: frozenset[str]
    states: Mapping[str, EdgeState]

    def __post_init__(self) -> None:
        object.__setattr__(self, "states", dict(self.states))

    def state(self, edge_id: str) -> EdgeState:
        try:
            return self.states[edge_id]
        except KeyError:
            raise UnknownEdge(f"knowledge has no edge {edge_id!r}")

    def decided_items(self) -> tuple[tuple[str, str], ...]:
        """Canonical, hashable view of the decided edges."""
        return tuple(
            sorted(
                (e, s.value)
                for e, s in self.states.items()
                if s is not EdgeState.UNKNOWN
            )
        )

    def moved_to(self, node: str) -> "KnowledgeState":
        self.net.require_node(node)
        return KnowledgeState(
            net=self.net, current=node, visited=self.visited, states=self.states
        )


def fresh_knowledge(net: RoadNetwork, start: str) -> KnowledgeState:
    """Pre reveal state: nothing visited, every edge unknown."""
    net.require_node(start)
    return KnowledgeState(
        net=net,
        current=start,
        visited=frozenset(),
        states={e.id: EdgeState.UNKNOWN for e in net.edges},
    )


def reveal(k: KnowledgeState, node: str, world: Realization) -> KnowledgeState:
    """Mark node visited and set its undecided incident edges from world.

    Idempotent: re revealing an already visited node changes nothing,
    and already decided edges are never rewritten.
    """
    k.net.require_node(node)
    states = dict(k.states)
    for e in k.net.incident[node]:
        if states[e.id] is EdgeState.UNKNOWN:
            states[e.id] = world.state(e.id)
    return KnowledgeState(
        net=k.net, current=k.current, visited=k.visited | {node}, states=states
    )


@dataclass(frozen=True)
class ExpectedTime:
    value: float
    failure_probability: float
    failure_cost: float


class _Planner:
    """Memoized expectimax over (current node, decided assignment)."""

    def __init__(
        self,
        net: RoadNetwork,
        model: BlockageModel,
        sink: str,
        failure_cost: float,
        uncertain_edge_cap: int = DEFAULT_UNCERTAIN_EDGE_CAP,
    ):
        model.validate_for(net)
        net.require_node(sink)
        self.cap = int(uncertain_edge_cap)
        self.net = net
        self.model = model
        self.sink = sink
        self.failure_cost = float(failure_cost)
        # edges with p exactly 0 or 1 are never random: decide them now
        self.predecided: dict[str, EdgeState] = {}
        for edge_id, p in model.probabilities.items():
            if p == 0.0:
                self.predecided[edge_id] = EdgeState.OPEN
            elif p == 1.0:
                self.predecided[edge_id] = EdgeState.BLOCKED
        self._memo: dict = {}

    def base_assignment(
        self, observed: Optional[Mapping[str, EdgeState]] = None
    ) -> dict[str, EdgeState]:
        """Merge model certainties with observations; observations win."""
        assignment = dict(self.predecided)
        if observed:
            for edge_id, s in observed.items():
                if s is not EdgeState.UNKNOWN:
                    assignment[edge_id] = s
        return assignment

    def plan(
        self, current: str, assignment: dict[str, EdgeState]
    ) -> tuple[float, float, Optional[str]]:
        """Cap checked entry point: value() over the remaining unknowns.

        The cap bounds the edges still undecided in this belief, not the
        model's global uncertain count, so observations already made keep
        large instances plannable.
        """
        undecided = [
            e for e in self.model.uncertain_edges() if e not in assignment
        ]
        if len(undecided) > self.cap:
            raise TooManyUncertainEdges(
                f"{len(undecided)} uncertain edges exceed the cap of "
                f"{self.cap}"
            )
        return self.value(current, assignment)

    def value(
        self, current: str, assignment: dict[str, EdgeState]
    ) -> tuple[float, float, Optional[str]]:
        """Expected remaining time, failure probability, best target.

        Target None means abort: failure is already certain here.
        """
        key = (current, tuple(sorted((e, s.value) for e, s in assignment.items())))
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        result = self._compute(current, assignment)
        self._memo[key] = result
        return result

    def _compute(
        self, current: str, assignment: dict[str, EdgeState]
    ) -> tuple[float, float, Optional[str]]:
        if current == self.sink:
            return 0.0, 0.0, None
        optimistic = reachable_nodes(
            self.net,
            current,
            lambda e: assignment.get(e.id) is not EdgeState.BLOCKED,
        )
        if self.sink not in optimistic:
            # certain failure no matter which states the unknowns take
            return self.failure_cost, 1.0, None

        open_dist = dijkstra_distances(
            self.net, current, lambda e: assignment.get(e.id) is EdgeState.OPEN
        )
        options: list[tuple[float, str, float]] = []
        sink_dist = open_dist.get(self.sink)
        if sink_dist is not None:
            options.append((sink_dist, self.sink, 0.0))
        for node in self.net.nodes:
            if node == self.sink or node not in open_dist:
                continue
            undecided = [
                e for e in self.net.incident[node] if e.id not in assignment
            ]
            if not undecided:
                continue
            ev, ef = self._reveal_expectation(node, assignment, undecided)
            options.append((open_dist[node] + ev, node, ef))

        if not options:
            return self.failure_cost, 1.0, None
        value, target, fail = min(options, key=lambda o: (o[0], o[1]))
        return value, fail, target

    def _reveal_expectation(
        self,
        node: str,
        assignment: dict[str, EdgeState],
        undecided: Sequence[Edge],
    ) -> tuple[float, float]:
        ids = [e.id for e in undecided]
        probs = [self.model.probability(i) for i in ids]
        total_v = 0.0
        total_f = 0.0
        for outcome in itertools.product(
            (EdgeState.OPEN, EdgeState.BLOCKED), repeat=len(ids)
        ):
            weight = 1.0
            for p, s in zip(probs, outcome):
                weight *= p if s is EdgeState.BLOCKED else 1.0 - p
            child = dict(assignment)
            child.update(zip(ids, outcome))
            v, f, _ = self.value(node, child)
            total_v += weight * v
            total_f += weight * f
        return total_v, total_f


def exact_expected_time(
    net: RoadNetwork,
    model: BlockageModel,
    source: str,
    sink: str,
    failure_cost: Optional[float] = None,
    uncertain_edge_cap: int = DEFAULT_UNCERTAIN_EDGE_CAP,
) -> ExpectedTime:
    """Expected travel time of an optimal traveler from source to sink.

    The expectation starts with the reveal of the source's incident
    edges. failure_probability is the chance the sink is unreachable in
    the realized world; those outcomes contribute the travel spent before
    failure became certain plus failure_cost.
    """
    net.require_node(source)
    net.require_node(sink)
    if source == sink:
        raise ValidationError("source and sink must differ")
    if failure_cost is None:
        failure_cost = default_failure_cost(net)
    planner = _Planner(net, model, sink, failure_cost, uncertain_edge_cap)
    value, fail, _ = planner.plan(source, planner.base_assignment())
    return ExpectedTime(
        value=value, failure_probability=fail, failure_cost=failure_cost
    )


def optimal_action(
    net: RoadNetwork,
    model: BlockageModel,
    knowledge: KnowledgeState,
    sink: str,
    failure_cost: Optional[float] = None,
    uncertain_edge_cap: int = DEFAULT_UNCERTAIN_EDGE_CAP,
) -> Optional[str]:
    """Best next target (a frontier node or the sink) from a knowledge state.

    Returns None to abort, which happens exactly when failure is already
    certain. Ties between equal value targets go to the lexicographically
    smallest node id. Observed states take precedence over the model, so
    observations that contradict a probability of 0 or 1 are respected.
    """
    net.require_node(sink)
    if knowledge.current == sink:
        raise ValidationError("traveler is already at the sink")
    if failure_cost is None:
        failure_cost = default_failure_cost(net)
    planner = _Planner(net, model, sink, failure_cost, uncertain_edge_cap)
    assignment = planner.base_assignment(knowledge.states)
    _, _, target = planner.plan(knowledge.current, assignment)
    return target


class Policy:
    """Decision rule: map a knowledge state to the next edge id, or None.

    None aborts the journey. Implementations must behave as pure
    functions of (current node, decided edge states); the exact policy
    evaluator and the simulator rely on that determinism.
    """

    kind: str = "abstract"

    def decide(self, k: KnowledgeState) -> Optional[str]:
        raise NotImplementedError


def _first_open_step(
    net: RoadNetwork, k: KnowledgeState, path_nodes: Sequence[str]
) -> str:
    """Edge id for the first hop of a path; must already be known open."""
    nxt = path_nodes[1]
    best: Optional[Edge] = None
    for e in net.outgoing[k.current]:
        if e.other(k.current) != nxt or k.state(e.id) is not EdgeState.OPEN:
            continue
        if best is None or (e.cost, e.id) < (best.cost, best.id):
            best = e
    if best is None:
        raise ValidationError(
            f"no known open edge from {k.current!r} to {nxt!r}; "
            "knowledge state is inconsistent"
        )
    return best.id


class OptimalPolicy(Policy):
    """Recompute the optimal action at every decision point."""

    kind = "optimal"

    def __init__(
        self,
        net: RoadNetwork,
        model: BlockageModel,
        sink: str,
        failure_cost: float,
        uncertain_edge_cap: int = DEFAULT_UNCERTAIN_EDGE_CAP,
    ):
        self.net = net
        self.sink = sink
        self._planner = _Planner(net, model, sink, failure_cost, uncertain_edge_cap)
        self._cache: dict = {}

    def decide(self, k: KnowledgeState) -> Optional[str]:
        key = (k.current, k.decided_items())
        if key in self._cache:
            return self._cache[key]
        assignment = self._planner.base_assignment(k.states)
        _, _, target = self._planner.plan(k.current, assignment)
        if target is None:
            step = None
        else:
            if target == k.current:
                raise ValidationError(
                    "knowledge state leaves undecided edges at the current node"
                )
            path = shortest_path(
                self.net,
                k.current,
                target,
                lambda e: assignment.get(e.id) is EdgeState.OPEN,
            )
            if path is None:
                raise ValidationError("planner chose an unreachable target")
            step = _first_open_step(self.net, k, path.nodes)
        self._cache[key] = step
        return step


class ReplanGreedyPolicy(Policy):
    """Walk the cheapest path that treats undecided edges as open.

    The plan is recomputed from the current knowledge at every node, so
    discovering a blockage on the planned path replans automatically and
    discoveries elsewhere leave the plan unchanged.
    """

    kind = "replan"

    def __init__(self, net: RoadNetwork, sink: str):
        self.net = net
        self.sink = sink
        self._cache: dict = {}

    def decide(self, k: KnowledgeState) -> Optional[str]:
        key = (k.current, k.decided_items())
        if key in self._cache:
            return self._cache[key]
        path = shortest_path(
            self.net,
            k.current,
            self.sink,
            lambda e: k.state(e.id) is not EdgeState.BLOCKED,
        )
        step = None if path is None else _first_open_step(self.net, k, path.nodes)
        self._cache[key] = step
        return step


class FixedRoutePolicy(Policy):
    """Follow a committed route; fall back to greedy replanning once some
    remaining hop has every edge between its endpoints known blocked.

    The check is per hop, so where parallel edges exist the route stays
    committed as long as each hop is passable by some edge, even if the
    cheap one is gone. Only current knowledge is consulted: a traveler
    bumped off the route who later stands on a route node with a clean
    remaining suffix resumes the route."""

    kind = "route"

    def __init__(self, net: RoadNetwork, sink: str, route: Sequence[str]):
        route = tuple(route)
        if len(route) < 2:
            raise BadRoute("route needs at least two nodes")
        for node in route:
            if node not in net.node_set:
                raise BadRoute(f"route visits unknown node {node!r}")
        if len(set(route)) != len(route):
            raise BadRoute("route revisits a node")
        if route[-1] != sink:
            raise BadRoute(f"route must end at the sink {sink!r}")
        for a, b in zip(route, route[1:]):
            if cheapest_edge(net, a, b) is None:
                raise BadRoute(f"route hop {a!r} to {b!r} has no edge")
        self.net = net
        self.sink = sink
        self.route = route
        self._index = {node: i for i, node in enumerate(route)}
        self._greedy = ReplanGreedyPolicy(net, sink)
        self._cache: dict = {}

    def _remaining_clean(self, k: KnowledgeState, i: int) -> bool:
        for a, b in zip(self.route[i:], self.route[i + 1 :]):
            passable = cheapest_edge(
                self.net, a, b, lambda e: k.state(e.id) is not EdgeState.BLOCKED
            )
            if passable is None:
                return False
        return True

    def decide(self, k: KnowledgeState) -> Optional[str]:
        key = (k.current, k.decided_items())
        if key in self._cache:
            return self._cache[key]
        i = self._index.get(k.current)
        if i is not None and i < len(self.route) - 1 and self._remaining_clean(k, i):
            path = (k.current, self.route[i + 1])
            step: Optional[str] = _first_open_step(self.net, k, path)
        else:
            step = self._greedy.decide(k)
        self._cache[key] = step
        return step


def make_policy(
    kind: str,
    net: RoadNetwork,
    model: BlockageModel,
    sink: str,
    failure_cost: Optional[float] = None,
    route: Optional[Sequence[str]] = None,
    uncertain_edge_cap: int = DEFAULT_UNCERTAIN_EDGE_CAP,
) -> Policy:
    net.require_node(sink)
    if failure_cost is None:
        failure_cost = default_failure_cost(net)
    if kind == "optimal":
        return OptimalPolicy(net, model, sink, failure_cost, uncertain_edge_cap)
    if kind == "replan":
        return ReplanGreedyPolicy(net, sink)
    if kind == "route":
        if route is None:
            raise BadRoute("fixed route policy needs a route")
        return FixedRoutePolicy(net, sink, route)
    raise ValidationError(f"unknown policy kind {kind!r}")


@dataclass(frozen=True)
class ReplicateOutcome:
    travel_time: float
    failed: bool
    path: tuple[str, ...]


def walk_policy(
    net: RoadNetwork,
    world: Realization,
    policy: Policy,
    source: str,
    sink: str,
    failure_cost: float,
) -> ReplicateOutcome:
    """Run one deterministic journey through a fully realized world.

    Pure function of (world, policy): replicate r of a simulation can be
    reproduced in isolation by sampling world r and calling this.
    """
    net.require_node(source)
    net.require_node(sink)
    k = reveal(fresh_knowledge(net, source), source, world)
    time = 0.0
    path = [source]
    max_steps = 4 * (len(net.nodes) + 1) * (len(net.edges) + 1) + 16
    for _ in range(max_steps):
        if k.current == sink:
            return ReplicateOutcome(time, False, tuple(path))
        edge_id = policy.decide(k)
        if edge_id is None:
            return ReplicateOutcome(time + failure_cost, True, tuple(path))
        edge = net.edge_by_id.get(edge_id)
        if edge is None:
            raise UnknownEdge(f"policy chose unknown edge {edge_id!r}")
        if edge not in net.outgoing[k.current]:
            raise ValidationError(
                f"policy chose edge {edge_id!r} not leaving {k.current!r}"
            )
        if k.state(edge_id) is not EdgeState.OPEN:
            raise ValidationError(
                f"policy tried to traverse edge {edge_id!r} not known open"
            )
        nxt = edge.other(k.current)
        time += edge.cost
        k = reveal(k.moved_to(nxt), nxt, world)
        path.append(nxt)
    raise RuntimeError("policy failed to terminate; this is a bug")


@dataclass(frozen=True)
class TravelTimeDistribution:
    """Per replicate travel times with the failed flag per replicate.

    Failed replicates store travel spent plus the failure cost. Summary
    statistics are derived from the raw arrays on demand, so they are
    exactly recomputable.
    """

    times: np.ndarray
    failed: np.ndarray
    failure_cost: float
    seed: int
    policy_kind: str

    QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)

    @property
    def replications(self) -> int:
        return int(self.times.size)

    @property
    def mean(self) -> float:
        return float(np.mean(self.times))

    @property
    def stderr(self) -> float:
        if self.replications < 2:
            return 0.0
        return float(np.std(self.times, ddof=1) / math.sqrt(self.replications))

    @property
    def failure_frequency(self) -> float:
        return float(np.mean(self.failed))

    def quantiles(self) -> dict[float, float]:
        values = np.quantile(self.times, self.QUANTILES)
        return {q: float(v) for q, v in zip(self.QUANTILES, values)}

    def summary(self) -> dict:
        return {
            "replications": self.replications,
            "mean": self.mean,
            "stderr": self.stderr,
            "quantiles": {f"{q:g}": v for q, v in self.quantiles().items()},
            "failure_frequency": self.failure_frequency,
            "failure_cost": self.failure_cost,
            "policy": self.policy_kind,
            "seed": self.seed,
        }


def simulate_policy(
    net: RoadNetwork,
    model: BlockageModel,
    policy: Policy,
    source: str,
    sink: str,
    replications: int,
    seed: int,
    failure_cost: Optional[float] = None,
    overrides: Optional[Mapping[str, EdgeState]] = None,
) -> TravelTimeDistribution:
    """Monte Carlo policy evaluation over sampled worlds.

    Replicate r draws its world from substream (seed, r), so output is
    independent of batching and worker count, and reruns are identical.
    """
    model.validate_for(net)
    net.require_node(source)
    net.require_node(sink)
    if replications < 1:
        raise ValidationError("replications must be at least 1")
    if failure_cost is None:
        failure_cost = default_failure_cost(net)
    times = np.empty(replications, dtype=float)
    failed = np.empty(replications, dtype=bool)
    for r in range(replications):
        world = sample_realization(model, seed, overrides, stream=r)
        outcome = walk_policy(net, world, policy, source, sink, failure_cost)
        times[r] = outcome.travel_time
        failed[r] = outcome.failed
    return TravelTimeDistribution(
        times=times,
        failed=failed,
        failure_cost=failure_cost,
        seed=seed,
        policy_kind=policy.kind,
    )


def evaluate_policy_exact(
    net: RoadNetwork,
    model: BlockageModel,
    policy: Policy,
    source: str,
    sink: str,
    failure_cost: Optional[float] = None,
    overrides: Optional[Mapping[str, EdgeState]] = None,
    uncertain_edge_cap: int = DEFAULT_UNCERTAIN_EDGE_CAP,
) -> ExpectedTime:
    """Exact expectation of a policy by enumerating reveal outcomes.

    The policy decides from its knowledge alone; overrides condition the
    dynamics, forcing the revealed state of chosen edges while every
    other edge keeps its model probability. Requires the policy to be a
    pure function of (current node, decided edge states).
    """
    model.validate_for(net)
    net.require_node(source)
    net.require_node(sink)
    if source == sink:
        raise ValidationError("source and sink must differ")
    if failure_cost is None:
        failure_cost = default_failure_cost(net)
    overrides = dict(overrides or {})
    for edge_id, s in overrides.items():
        if edge_id not in model.probabilities:
            raise UnknownEdge(f"override for unknown edge {edge_id!r}")
        if s not in (EdgeState.OPEN, EdgeState.BLOCKED):
            raise ValidationError("override state must be open or blocked")
    free = [
        e
        for e in model.uncertain_edges()
        if e not in overrides
    ]
    if len(free) > uncertain_edge_cap:
        raise TooManyUncertainEdges(
            f"{len(free)} uncertain edges exceed the cap of {uncertain_edge_cap}"
        )

    def branch_states(edge_id: str) -> list[tuple[EdgeState, float]]:
        if edge_id in overrides:
            return [(overrides[edge_id], 1.0)]
        p = model.probability(edge_id)
        if p == 0.0:
            return [(EdgeState.OPEN, 1.0)]
        if p == 1.0:
            return [(EdgeState.BLOCKED, 1.0)]
        return [(EdgeState.OPEN, 1.0 - p), (EdgeState.BLOCKED, p)]

    memo: dict = {}
    active: set = set()

    def arrive(k: KnowledgeState, node: str) -> tuple[float, float]:
        """Expected (cost, failure) after revealing node's undecided edges."""
        undecided = [e.id for e in net.incident[node] if k.state(e.id) is EdgeState.UNKNOWN]
        choices = [branch_states(e) for e in undecided]
        total_v = 0.0
        total_f = 0.0
        for combo in itertools.product(*choices):
            weight = 1.0
            for _, w in combo:
                weight *= w
            states = dict(k.states)
            states.update({e: s for e, (s, _) in zip(undecided, combo)})
            child = KnowledgeState(
                net=net, current=node, visited=k.visited | {node}, states=states
            )
            v, f = visit(child)
            total_v += weight * v
            total_f += weight * f
        return total_v, total_f

    def visit(k: KnowledgeState) -> tuple[float, float]:
        if k.current == sink:
            return 0.0, 0.0
        key = (k.current, k.decided_items())
        hit = memo.get(key)
        if hit is not None:
            return hit
        if key in active:
            raise ValidationError(
                "policy revisits a knowledge state without new information"
            )
        active.add(key)
        try:
            edge_id = policy.decide(k)
            if edge_id is None:
                result = (failure_cost, 1.0)
            else:
                edge = net.edge_by_id.get(edge_id)
                if edge is None:
                    raise UnknownEdge(f"policy chose unknown edge {edge_id!r}")
                if edge not in net.outgoing[k.current]:
                    raise ValidationError(
                        f"policy chose edge {edge_id!r} not leaving {k.current!r}"
                    )
                if k.state(edge_id) is not EdgeState.OPEN:
                    raise ValidationError(
                        f"policy tried to traverse edge {edge_id!r} not known open"
                    )
                nxt = edge.other(k.current)
                v, f = arrive(k.moved_to(nxt), nxt)
                result = (edge.cost + v, f)
        finally:
            active.discard(key)
        memo[key] = result
        return result

    value, fail = arrive(fresh_knowledge(net, source), source)
    return ExpectedTime(
        value=value, failure_probability=fail, failure_cost=failure_cost
    )
