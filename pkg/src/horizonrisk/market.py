"""Investment model: prices on the tree, policies, wealth, and policy spaces.

A policy holds a d-vector of asset quantities at every node of times
0..T-1. Wealth follows the self-financing recursion
V_{t+1} = <X_t, S_{t+1} - S_t> + V_t with the risk-free rate at zero.
Policy spaces are explicit finite lists supporting conditional restriction,
pasting across events, truncation, and stopping-time generation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

from .errors import (
    DimensionError,
    EmptyConditionalSpace,
    EnumerationLimit,
    PrefixMismatch,
    UnknownNode,
)
from .tree import AdaptedProcess, ScenarioTree, Slice

Vector = tuple[float, ...]


@dataclass(frozen=True)
class MarketModel:
    tree: ScenarioTree
    num_assets: int
    prices: AdaptedProcess  # d-vector slice per time 0..T
    initial_wealth: float = 0.0

    def __post_init__(self):
        if self.num_assets < 1:
            raise DimensionError(f"need at least one asset, got {self.num_assets}")
        for t in range(self.tree.horizon + 1):
            sl = self.prices.at(t)
            if sl.values.keys() != set(self.tree.nodes_at(t)):
                raise ValueError(f"price slice at time {t} does not cover the time-{t} nodes")
            for nid, vec in sl.values.items():
                if len(vec) != self.num_assets:
                    raise DimensionError(
                        f"price at node {nid!r} has {len(vec)} components, expected {self.num_assets}"
                    )


@dataclass(frozen=True, eq=False)
class Policy:
    """Allocation vectors on times 0..T-1. Identity is nodewise: two policies
    with the same allocations everywhere are the same policy."""

    allocations: AdaptedProcess
    label: str = ""

    @cached_property
    def _time_keys(self) -> dict[int, tuple]:
        return {
            t: tuple(sorted(sl.values.items()))
            for t, sl in sorted(self.allocations.slices.items())
        }

    @cached_property
    def key(self) -> tuple:
        """Canonical nodewise-exact identity, independent of the label."""
        return tuple(sorted(self._time_keys.items()))

    @property
    def times(self) -> tuple[int, ...]:
        return self.allocations.times

    def agrees_before(self, other: "Policy", t: int) -> bool:
        """True iff allocations match at every node of every time u < t."""
        return all(self._time_keys.get(u) == other._time_keys.get(u) for u in range(t))

    @staticmethod
    def from_maps(label: str, maps: dict[int, dict[str, Vector]]) -> "Policy":
        return Policy(
            AdaptedProcess({t: Slice(t, dict(vals)) for t, vals in maps.items()}), label
        )


@dataclass(frozen=True)
class Event:
    """An F_t-measurable event: a subset of the time-t nodes."""

    time: int
    nodes: frozenset[str]


@dataclass(frozen=True, eq=False)
class PolicySpace:
    """Finite family of policies on a common tree, deduplicated nodewise."""

    policies: tuple[Policy, ...]
    label: str = ""

    def __post_init__(self):
        if not self.policies:
            raise ValueError("policy space must be non-empty")
        kept, seen = [], set()
        for p in self.policies:
            if p.key not in seen:
                seen.add(p.key)
                kept.append(p)
        object.__setattr__(self, "policies", tuple(kept))
        shape = _domain_shape(kept[0])
        for p in kept[1:]:
            if _domain_shape(p) != shape:
                raise ValueError("all policies in a space must share tree nodes and asset count")

    def __len__(self) -> int:
        return len(self.policies)

    def __iter__(self):
        return iter(self.policies)

    @cached_property
    def _keys(self) -> dict[tuple, int]:
        return {p.key: i for i, p in enumerate(self.policies)}

    def contains(self, policy: Policy) -> bool:
        return policy.key in self._keys

    def index_of(self, policy: Policy) -> int:
        try:
            return self._keys[policy.key]
        except KeyError:
            raise ValueError(f"policy {policy.label!r} is not a member") from None


def _domain_shape(policy: Policy) -> tuple:
    return tuple(
        (t, nid, len(vec))
        for t, sl in sorted(policy.allocations.slices.items())
        for nid, vec in sorted(sl.values.items())
    )


@dataclass(frozen=True)
class StoppingTime:
    """Adapted absorbing stop rule: per node, whether stopping happened by then."""

    stopped_by: dict[str, bool]

    def stopped(self, node_id: str) -> bool:
        return self.stopped_by[node_id]


def constant_policy(tree: ScenarioTree, num_assets: int, value: float, label: str) -> Policy:
    vec = (float(value),) * num_assets
    return Policy(
        AdaptedProcess(
            {t: Slice(t, {n: vec for n in tree.nodes_at(t)}) for t in range(tree.horizon)}
        ),
        label,
    )


def zero_policy(tree: ScenarioTree, num_assets: int) -> Policy:
    return constant_policy(tree, num_assets, 0.0, "zero")


def wealth_process(market: MarketModel, policy: Policy) -> AdaptedProcess:
    """Wealth slices on times 0..T under the self-financing recursion,
    starting from the market's initial wealth at the root. Wealth is frozen
    after T; queries beyond T should clamp to the final slice."""
    tree = market.tree
    d = market.num_assets
    wealth = {tree.root: market.initial_wealth}
    for t in range(tree.horizon):
        alloc = policy.allocations.at(t)
        prices_now = market.prices.at(t)
        prices_next = market.prices.at(t + 1)
        for nid in tree.nodes_at(t):
            x = alloc[nid]
            if len(x) != d:
                raise DimensionError(
                    f"allocation at node {nid!r} has {len(x)} components, expected {d}"
                )
            s_now = prices_now[nid]
            for child in tree.children(nid):
                s_next = prices_next[child]
                gain = sum(x[i] * (s_next[i] - s_now[i]) for i in range(d))
                wealth[child] = wealth[nid] + gain
    return AdaptedProcess(
        {
            t: Slice(t, {n: wealth[n] for n in tree.nodes_at(t)})
            for t in range(tree.horizon + 1)
        }
    )


def truncate(policy: Policy, cutoff: int) -> Policy:
    """Zero the allocations from time `cutoff` onward, keeping earlier times.

    A cutoff at or beyond the last decision time returns the policy itself.
    """
    if cutoff < 0:
        raise ValueError(f"cutoff must be >= 0, got {cutoff}")
    times = policy.times
    if not times or cutoff > times[-1]:
        return policy
    slices = {}
    for t, sl in policy.allocations.slices.items():
        if t < cutoff:
            slices[t] = sl
        else:
            slices[t] = Slice(t, {n: (0.0,) * len(v) for n, v in sl.values.items()})
    return Policy(AdaptedProcess(slices), f"{policy.label}|cut{cutoff}")


def conditional_space(space: PolicySpace, t: int, past: Policy | None = None) -> PolicySpace:
    """Members agreeing with `past` at every node of every time before t.

    Agreement is required in all states of the world, not just along one
    path, so that switching between members at time t stays adapted.
    At t = 0 the space itself is returned.
    """
    if t <= 0:
        return space
    if past is None:
        raise ValueError("a past policy is required for t > 0")
    members = [p for p in space.policies if p.agrees_before(past, t)]
    if not members:
        raise EmptyConditionalSpace(
            f"no member of {space.label!r} agrees with {past.label!r} before t={t}"
        )
    return PolicySpace(tuple(members), label=f"{space.label}|t{t}")


def paste(tree: ScenarioTree, event: Event, x: Policy, y: Policy) -> Policy:
    """Combine two policies across an event: follow x on subtrees rooted in
    the event, y elsewhere, with their common values before the event time.
    """
    t = event.time
    level = set(tree.nodes_at(t))
    unknown = event.nodes - level
    if unknown:
        raise UnknownNode(f"event nodes {sorted(unknown)} are not time-{t} nodes")
    if not x.agrees_before(y, t):
        raise PrefixMismatch(
            f"policies {x.label!r} and {y.label!r} disagree before t={t}"
        )
    slices = {}
    for u, x_slice in x.allocations.slices.items():
        if u < t:
            slices[u] = x_slice
            continue
        y_slice = y.allocations.at(u)
        slices[u] = Slice(
            u,
            {
                n: (x_slice[n] if tree.ancestor_at(n, t) in event.nodes else y_slice[n])
                for n in x_slice.values
            },
        )
    return Policy(AdaptedProcess(slices), f"paste(t{t};{x.label};{y.label})")


def is_pasting_closed(
    tree: ScenarioTree, space: PolicySpace, t: int, past: Policy | None = None
) -> tuple[bool, tuple[Event, Policy, Policy] | None]:
    """Exhaustively check that every paste of members of the conditional
    space, over every F_t event, lands nodewise in the space.

    Returns (True, None) or (False, witness). Exponential in the number of
    time-t nodes; intended for desk-scale trees.
    """
    cond = conditional_space(space, t, past)
    keys = {p.key for p in cond.policies}
    level = tree.nodes_at(t)
    for r in range(len(level) + 1):
        for subset in itertools.combinations(level, r):
            event = Event(t, frozenset(subset))
            for x in cond.policies:
                for y in cond.policies:
                    if x is y:
                        continue
                    if paste(tree, event, x, y).key not in keys:
                        return False, (event, x, y)
    return True, None


def is_truncation_closed(
    space: PolicySpace, m: int
) -> tuple[bool, tuple[int, Policy, Policy] | None]:
    """Check that truncating any member of any conditional space at t+m
    stays nodewise inside that conditional space.

    Returns (True, None) or (False, (t, past, member)).
    """
    if m < 1:
        raise ValueError(f"horizon must be >= 1, got {m}")
    times = space.policies[0].times
    for t in range(len(times)):
        seen_prefixes = set()
        for past in space.policies:
            prefix = tuple(past._time_keys.get(u) for u in range(t))
            if prefix in seen_prefixes:
                continue
            seen_prefixes.add(prefix)
            cond = conditional_space(space, t, past)
            keys = {p.key for p in cond.policies}
            for member in cond.policies:
                if truncate(member, t + m).key not in keys:
                    return False, (t, past, member)
    return True, None


def count_stopping_times(tree: ScenarioTree) -> int:
    """Number of stopping times valued in 0..T: f(leaf) = 1 and
    f(n) = 1 + prod f(children)."""

    def f(node_id: str) -> int:
        children = tree.children(node_id)
        if not children:
            return 1
        prod = 1
        for c in children:
            prod *= f(c)
        return 1 + prod

    return f(tree.root)


def enumerate_stopping_times(tree: ScenarioTree, cap: int = 10**6) -> list[StoppingTime]:
    """All adapted absorbing stop rules, as antichains of first-stop nodes.

    Every path stops exactly once by time T. Raises EnumerationLimit before
    enumerating if the count exceeds `cap`.
    """
    total = count_stopping_times(tree)
    if total > cap:
        raise EnumerationLimit(f"{total} stopping times exceed the cap of {cap}")

    def antichains(node_id: str) -> list[frozenset[str]]:
        children = tree.children(node_id)
        if not children:
            return [frozenset((node_id,))]
        combos = [frozenset()]
        for c in children:
            combos = [a | b for a in combos for b in antichains(c)]
        return [frozenset((node_id,))] + combos

    rules = []
    for stop_set in antichains(tree.root):
        stopped = {}
        for nid in tree.node_ids:
            node = tree.node(nid)
            hit = nid in stop_set
            while not hit and node.parent is not None:
                node = tree.node(node.parent)
                hit = node.id in stop_set
            stopped[nid] = hit
        rules.append(StoppingTime(stopped))
    return rules


def stopping_time_space(tree: ScenarioTree, base: Policy, cap: int = 10**6) -> PolicySpace:
    """The family of policies "follow `base` until a stopping time, then hold
    nothing", over all stopping times valued in 0..T, deduplicated."""
    members = []
    for rule in enumerate_stopping_times(tree, cap):
        slices = {}
        for t, sl in base.allocations.slices.items():
            slices[t] = Slice(
                t,
                {
                    n: ((0.0,) * len(v) if rule.stopped(n) else v)
                    for n, v in sl.values.items()
                },
            )
        first_stops = sorted(
            n for n, s in rule.stopped_by.items()
            if s and (tree.parent(n) is None or not rule.stopped(tree.parent(n)))
        )
        members.append(
            Policy(AdaptedProcess(slices), f"{base.label}|stop@{','.join(first_stops)}")
        )
    return PolicySpace(tuple(members), label=f"stopping({base.label})")
