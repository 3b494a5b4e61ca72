"""Small worked networks used in tests, docs, and the study scripts.

Both fixtures are tiny enough to check by hand and exercise the two
features that make routing under uncertain blockage interesting: a
risky shortcut against a safe detour, and a gamble whose worth flips
with the blockage probability.
"""

from __future__ import annotations

from .blockage import BlockageModel
from .network import Edge, RoadNetwork


def tri_fixture() -> tuple[RoadNetwork, BlockageModel]:
    """Triangle: direct road S-T (cost 10, blocked w.p. 0.3) versus the
    certain detour S-M-T (cost 4 + 8). Expected time from S to T is
    0.7 * 10 + 0.3 * 12 = 10.6 with zero failure probability."""
    net = RoadNetwork(
        nodes=("S", "M", "T"),
        edges=(
            Edge(id="d", u="S", v="T", cost=10.0),
            Edge(id="a", u="S", v="M", cost=4.0),
            Edge(id="b", u="M", v="T", cost=8.0),
        ),
    )
    model = BlockageModel(probabilities={"d": 0.3, "a": 0.0, "b": 0.0})
    return net, model


def tb_fixture(q: float = 0.25) -> tuple[RoadNetwork, BlockageModel]:
    """Tie breaker: S-A-T (cost 1 + 1, second hop blocked w.p. q)
    against a certain direct road S-T of cost 4. The gamble costs
    2 + 4q in expectation (1 + 1 on good news; on bad news walk back
    and take the direct road, 1 + 1 + 4), so q = 0.5 ties at 4.0 and
    the tie goes to the lexicographically smaller move target A."""
    net = RoadNetwork(
        nodes=("S", "A", "T"),
        edges=(
            Edge(id="sa", u="S", v="A", cost=1.0),
            Edge(id="at", u="A", v="T", cost=1.0),
            Edge(id="st", u="S", v="T", cost=4.0),
        ),
    )
    model = BlockageModel(probabilities={"sa": 0.0, "at": q, "st": 0.0})
    return net, model
