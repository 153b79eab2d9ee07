"""Exact probabilistic queries on a BayesNet.

:func:`posterior` runs variable elimination over log-space factors with a
min-degree elimination order; :func:`brute_force_posterior` materializes
the full joint tensor and marginalizes it directly, serving as the testing
oracle. Both raise :class:`ZeroProbabilityEvidence` instead of returning
NaNs when the evidence has probability zero, so callers must handle
unreachable states explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import (
    IncompleteAssignment,
    StateSpaceTooLarge,
    UnknownState,
    UnknownVariable,
    ZeroProbabilityEvidence,
)
from .estimation import BayesNet
from .graph import topological_order


@dataclass(frozen=True)
class Query:
    target: str
    evidence: Mapping[str, int] = field(default_factory=dict)


def _validate_query(net: BayesNet, q: Query) -> None:
    if q.target not in net.graph.node_set:
        raise UnknownVariable(f"no node named {q.target!r}")
    if q.target in q.evidence:
        raise UnknownVariable(f"target {q.target!r} cannot also be evidence")
    for name, state in q.evidence.items():
        if name not in net.graph.node_set:
            raise UnknownVariable(f"no node named {name!r}")
        if not 0 <= state < net.cardinality(name):
            raise UnknownState(f"{name} has no state index {state}")


def joint_prob(net: BayesNet, assignment: Mapping[str, int]) -> float:
    """Probability of one full assignment: the product of CPT entries,
    accumulated in log space."""
    missing = net.graph.node_set - assignment.keys()
    extra = assignment.keys() - net.graph.node_set
    if missing or extra:
        raise IncompleteAssignment(
            f"assignment must cover every node exactly once "
            f"(missing {sorted(missing)}, unexpected {sorted(extra)})")
    lp = 0.0
    for node in net.graph.nodes:
        cpt = net.cpts[node]
        state = assignment[node]
        if not 0 <= state < cpt.cardinality:
            raise UnknownState(f"{node} has no state index {state}")
        p = cpt.table[cpt.row_index(assignment), state]
        if p == 0.0:
            return 0.0
        lp += np.log(p)
    return float(np.exp(lp))


class _Factor:
    """Log-space potential over a sorted tuple of variables."""

    __slots__ = ("vars", "logp")

    def __init__(self, vars: tuple[str, ...], logp: np.ndarray):
        self.vars = vars
        self.logp = logp

    @classmethod
    def from_cpt(cls, net: BayesNet, node: str) -> "_Factor":
        cpt = net.cpts[node]
        scope = cpt.parents + (node,)
        shape = cpt.parent_cards + (cpt.cardinality,)
        with np.errstate(divide="ignore"):
            logp = np.log(cpt.table).reshape(shape)
        order = tuple(sorted(range(len(scope)), key=lambda k: scope[k]))
        return cls(tuple(scope[k] for k in order), np.transpose(logp, order))

    def restrict(self, evidence: Mapping[str, int]) -> "_Factor":
        idx = tuple(evidence.get(v, slice(None)) for v in self.vars)
        keep = tuple(v for v in self.vars if v not in evidence)
        return _Factor(keep, self.logp[idx])

    def multiply(self, other: "_Factor") -> "_Factor":
        merged = tuple(sorted(set(self.vars) | set(other.vars)))

        def expand(f: _Factor) -> np.ndarray:
            shape = tuple(f.logp.shape[f.vars.index(v)] if v in f.vars else 1 for v in merged)
            order = tuple(f.vars.index(v) for v in merged if v in f.vars)
            return np.transpose(f.logp, order).reshape(shape)

        return _Factor(merged, expand(self) + expand(other))

    def marginalize(self, var: str) -> "_Factor":
        axis = self.vars.index(var)
        with np.errstate(invalid="ignore"):
            logp = np.logaddexp.reduce(self.logp, axis=axis)
        return _Factor(tuple(v for v in self.vars if v != var), logp)


def _relevant_nodes(net: BayesNet, q: Query) -> set[str]:
    # barren leaves outside the ancestral closure of target+evidence sum out to 1
    out = {q.target, *q.evidence}
    stack = list(out)
    while stack:
        v = stack.pop()
        for p in net.graph.parents(v):
            if p not in out:
                out.add(p)
                stack.append(p)
    return out


def posterior(net: BayesNet, q: Query) -> np.ndarray:
    """P(target | evidence) by variable elimination.

    Elimination order is the min-degree heuristic on the factor
    interaction graph, ties broken lexicographically. The returned vector
    is normalized over the target's states.
    """
    _validate_query(net, q)
    relevant = _relevant_nodes(net, q)
    restricted = [_Factor.from_cpt(net, n).restrict(q.evidence) for n in sorted(relevant)]
    factors = [f for f in restricted if f.vars]
    scalar = sum(float(f.logp) for f in restricted if not f.vars)

    hidden = {v for f in factors for v in f.vars} - {q.target}
    adj: dict[str, set[str]] = {v: set() for v in hidden | {q.target}}
    for f in factors:
        for a in f.vars:
            for b in f.vars:
                if a != b:
                    adj[a].add(b)

    while hidden:
        var = min(hidden, key=lambda v: (len(adj[v] & hidden), v))
        bucket = [f for f in factors if var in f.vars]
        rest = [f for f in factors if var not in f.vars]
        prod = bucket[0]
        for f in bucket[1:]:
            prod = prod.multiply(f)
        factors = rest + [prod.marginalize(var)]
        for a in adj[var]:
            adj[a].discard(var)
            adj[a].update(x for x in adj[var] if x != a)
        hidden.discard(var)

    result = _Factor((q.target,), np.zeros(net.cardinality(q.target)))
    for f in factors:
        result = result.multiply(f)
    logp = result.logp + scalar

    with np.errstate(invalid="ignore"):
        z = float(np.logaddexp.reduce(logp))
    if z == -np.inf or np.isnan(z):
        raise ZeroProbabilityEvidence(f"evidence {dict(q.evidence)!r} has probability 0")
    return np.exp(logp - z)


def brute_force_posterior(net: BayesNet, q: Query) -> np.ndarray:
    """Enumeration oracle: build the full joint tensor, slice in the
    evidence, and sum out everything but the target."""
    _validate_query(net, q)
    nodes = tuple(sorted(net.graph.nodes))
    cards = tuple(net.cardinality(n) for n in nodes)
    size = 1
    for c in cards:
        size *= c
        if size > 10_000_000:
            raise StateSpaceTooLarge(f"joint has more than 1e7 configurations")
    topological_order(net.graph)

    log_joint = np.zeros(cards)
    for node in nodes:
        cpt = net.cpts[node]
        scope = cpt.parents + (node,)
        shape = tuple(cards[nodes.index(v)] if v in scope else 1 for v in nodes)
        axes = tuple(sorted(range(len(scope)), key=lambda k: nodes.index(scope[k])))
        with np.errstate(divide="ignore"):
            block = np.log(cpt.table).reshape(cpt.parent_cards + (cpt.cardinality,))
        log_joint = log_joint + np.transpose(block, axes).reshape(shape)

    idx = tuple(q.evidence.get(v, slice(None)) for v in nodes)
    sliced = log_joint[idx]
    keep = [v for v in nodes if v not in q.evidence]
    with np.errstate(invalid="ignore"):
        for v in [v for v in keep if v != q.target]:
            sliced = np.logaddexp.reduce(sliced, axis=keep.index(v))
            keep.remove(v)
        z = float(np.logaddexp.reduce(sliced))
    if z == -np.inf or np.isnan(z):
        raise ZeroProbabilityEvidence(f"evidence {dict(q.evidence)!r} has probability 0")
    return np.exp(sliced - z)
