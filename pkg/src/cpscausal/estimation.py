"""Parameter estimation, independence testing, and network scores.

Everything here reduces to contingency counts ``N(c, r)`` of a child state
``c`` under a parent configuration ``r``. Parent configurations are indexed
row-major over the parent state indices in the CPT's parent order, so a CPT
table has shape ``(prod(parent_cards), child_card)``.

Closed forms (natural logarithms throughout):

* MLE             ``P(c|r) = N(c,r) / N(r)``, uniform fallback on ``N(r)=0``
* Bayesian (BDeu-uniform prior, equivalent sample size ``ess``)
                  ``P(c|r) = (N(c,r) + ess/(q*r_i)) / (N(r) + ess/q)``
* BIC             ``sum_i [ LL_i - (log N / 2) * (r_i - 1) * q_i ]``
* K2              ``sum_i sum_r [ log (r_i-1)! - log (N(r)+r_i-1)! + sum_c log N(c,r)! ]``
* BDeu            Dirichlet-equivalent marginal likelihood with uniform
                  ess allocation over rows and cells

where ``q_i`` is the number of parent configurations of node ``i`` and
``r_i`` its cardinality. Higher scores are better. BIC and BDeu are
score-equivalent across Markov-equivalent DAGs; K2 is not.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import lgamma, log
from typing import Mapping

import numpy as np
from scipy.stats import chi2 as _chi2_dist

from .errors import (
    DuplicateParent,
    EmptyDataset,
    InsufficientData,
    NonPositiveEss,
    UnknownColumn,
)
from .graph import CausalGraph, topological_order
from .ingest import DiscreteDataset


@dataclass(frozen=True)
class Cpt:
    """Conditional probability table P(child | parents).

    ``table[r, c]`` is the probability of child state ``c`` under parent
    configuration ``r`` (row-major over ``parent_cards``). Rows flagged in
    ``uniform_rows`` had zero observations and fell back to uniform.
    """

    child: str
    parents: tuple[str, ...]
    parent_cards: tuple[int, ...]
    states: tuple[str, ...]
    table: np.ndarray = field(repr=False)
    uniform_rows: frozenset[int] = frozenset()

    def __post_init__(self):
        q = int(np.prod(self.parent_cards)) if self.parents else 1
        if self.table.shape != (q, len(self.states)):
            raise EmptyDataset(f"{self.child}: CPT shape {self.table.shape} != ({q}, {len(self.states)})")
        if np.any(self.table < -1e-12) or np.any(self.table > 1 + 1e-12):
            raise EmptyDataset(f"{self.child}: CPT entries outside [0, 1]")
        if np.any(np.abs(self.table.sum(axis=1) - 1.0) > 1e-9):
            raise EmptyDataset(f"{self.child}: CPT rows must sum to 1")

    @property
    def cardinality(self) -> int:
        return len(self.states)

    def row_index(self, parent_states: Mapping[str, int]) -> int:
        idx = tuple(parent_states[p] for p in self.parents)
        if not idx:
            return 0
        return int(np.ravel_multi_index(idx, self.parent_cards))


@dataclass(frozen=True)
class BayesNet:
    """A DAG plus one CPT per node; the joint factorizes over the families."""

    graph: CausalGraph
    cpts: Mapping[str, Cpt]

    def __post_init__(self):
        topological_order(self.graph)
        for n in self.graph.nodes:
            if n not in self.cpts:
                raise EmptyDataset(f"missing CPT for node {n}")
            if self.cpts[n].parents != tuple(sorted(self.graph.parents(n))):
                raise EmptyDataset(f"CPT parents for {n} do not match the graph")

    @property
    def nodes(self) -> tuple[str, ...]:
        return self.graph.nodes

    def states(self, node: str) -> tuple[str, ...]:
        if node not in self.cpts:
            raise UnknownColumn(f"no node named {node!r}")
        return self.cpts[node].states

    def cardinality(self, node: str) -> int:
        return len(self.states(node))


@dataclass(frozen=True)
class CiResult:
    statistic: float
    dof: int
    p_value: float
    independent: bool


def _check_family(ds: DiscreteDataset, child: str, parents: tuple[str, ...]) -> None:
    ds.index(child)
    for p in parents:
        ds.index(p)
    if len(set(parents)) != len(parents) or child in parents:
        raise DuplicateParent(f"{child}: parents must be distinct and exclude the child")


def counts(ds: DiscreteDataset, child: str, parents: tuple[str, ...] | list[str] = ()) -> np.ndarray:
    """Contingency counts N(child_state, parent_config), shape (q, r_child)."""
    parents = tuple(parents)
    _check_family(ds, child, parents)
    r = ds.cardinality(child)
    cards = tuple(ds.cardinality(p) for p in parents)
    q = int(np.prod(cards)) if parents else 1
    c = ds.column(child)
    if parents:
        cfg = np.ravel_multi_index(tuple(ds.column(p) for p in parents), cards)
    else:
        cfg = np.zeros(ds.n_records, dtype=np.int64)
    flat = np.bincount(cfg * r + c, minlength=q * r)
    return flat.reshape(q, r)


def _fit(ds: DiscreteDataset, graph: CausalGraph, smooth) -> BayesNet:
    topological_order(graph)
    cpts = {}
    for node in graph.nodes:
        parents = tuple(sorted(graph.parents(node)))
        n = counts(ds, node, parents)
        table, uniform = smooth(n)
        cpts[node] = Cpt(
            child=node,
            parents=parents,
            parent_cards=tuple(ds.cardinality(p) for p in parents),
            states=ds.spec(node).states,
            table=table,
            uniform_rows=uniform,
        )
    return BayesNet(graph=graph, cpts=cpts)


def fit_mle(ds: DiscreteDataset, graph: CausalGraph) -> BayesNet:
    """Maximum-likelihood CPTs: exact count ratios, uniform on unseen rows."""

    def smooth(n: np.ndarray):
        row = n.sum(axis=1)
        empty = row == 0
        table = np.empty(n.shape, dtype=np.float64)
        table[~empty] = n[~empty] / row[~empty, None]
        table[empty] = 1.0 / n.shape[1]
        return table, frozenset(np.flatnonzero(empty).tolist())

    return _fit(ds, graph, smooth)


def fit_bayes(ds: DiscreteDataset, graph: CausalGraph, ess: float = 1.0) -> BayesNet:
    """Dirichlet-smoothed posterior-mean CPTs under a BDeu-uniform prior."""
    if ess <= 0:
        raise NonPositiveEss(f"ess must be > 0, got {ess}")

    def smooth(n: np.ndarray):
        q, r = n.shape
        alpha = ess / (q * r)
        table = (n + alpha) / (n.sum(axis=1) + alpha * r)[:, None]
        return table, frozenset(np.flatnonzero(n.sum(axis=1) == 0).tolist())

    return _fit(ds, graph, smooth)


def chi_square_ci(ds: DiscreteDataset, i: str, j: str, s: tuple[str, ...] | list[str] = (),
                  alpha: float = 0.01) -> CiResult:
    """Pearson chi-square test of i independent of j given the variables in s.

    The statistic sums over the strata (configurations of s); expected
    counts come from each stratum's margins. Strata with no observations
    are skipped and excluded from the degrees of freedom, which are
    ``(|i|-1) * (|j|-1)`` per non-empty stratum.
    """
    s = tuple(s)
    if i == j or i in s or j in s:
        raise DuplicateParent("i, j, and the conditioning set must be disjoint")
    _check_family(ds, i, (j,) + s)
    ci, cj = ds.cardinality(i), ds.cardinality(j)
    xi, xj = ds.column(i), ds.column(j)
    if np.all(xi == xi[0]) or np.all(xj == xj[0]):
        raise InsufficientData(f"{i if np.all(xi == xi[0]) else j} is constant in the data")

    if s:
        cards = tuple(ds.cardinality(v) for v in s)
        strata = np.ravel_multi_index(tuple(ds.column(v) for v in s), cards)
        n_strata = int(np.prod(cards))
    else:
        strata = np.zeros(ds.n_records, dtype=np.int64)
        n_strata = 1

    joint = np.bincount((strata * ci + xi) * cj + xj, minlength=n_strata * ci * cj)
    joint = joint.reshape(n_strata, ci, cj).astype(np.float64)

    stat = 0.0
    dof = 0
    seen_any = False
    for k in range(n_strata):
        obs = joint[k]
        total = obs.sum()
        if total == 0:
            continue
        seen_any = True
        dof += (ci - 1) * (cj - 1)
        expected = np.outer(obs.sum(axis=1), obs.sum(axis=0)) / total
        mask = expected > 0
        stat += float((np.square(obs[mask] - expected[mask]) / expected[mask]).sum())
    if not seen_any:
        raise InsufficientData("all strata are empty")

    p = float(_chi2_dist.sf(stat, dof))
    return CiResult(statistic=stat, dof=dof, p_value=p, independent=p > alpha)


def mutual_information(ds: DiscreteDataset, i: str, j: str) -> float:
    """Plug-in mutual information of two columns, natural log, in nats."""
    if i == j:
        raise DuplicateParent("mutual information needs two distinct variables")
    joint = counts(ds, i, (j,)).T.astype(np.float64) / ds.n_records  # (card_i, card_j)
    pi = joint.sum(axis=1)
    pj = joint.sum(axis=0)
    mask = joint > 0
    ratio = joint[mask] / np.outer(pi, pj)[mask]
    return float((joint[mask] * np.log(ratio)).sum())


def family_score(ds: DiscreteDataset, child: str, parents: tuple[str, ...],
                 method: str = "bic", ess: float = 1.0) -> float:
    """Decomposable per-family contribution of one node to a network score."""
    n = counts(ds, child, parents)
    q, r = n.shape
    row = n.sum(axis=1)
    if method == "bic":
        mask = n > 0
        row_totals = np.broadcast_to(row[:, None], n.shape)
        ll = float((n[mask] * np.log(n[mask] / row_totals[mask])).sum())
        return ll - (log(ds.n_records) / 2.0) * (r - 1) * q
    if method == "k2":
        out = 0.0
        for k in range(q):
            out += lgamma(r) - lgamma(row[k] + r)
            out += sum(lgamma(v + 1) for v in n[k])
        return out
    if method == "bdeu":
        if ess <= 0:
            raise NonPositiveEss(f"ess must be > 0, got {ess}")
        a_row = ess / q
        a_cell = ess / (q * r)
        out = 0.0
        for k in range(q):
            out += lgamma(a_row) - lgamma(a_row + row[k])
            out += sum(lgamma(a_cell + v) - lgamma(a_cell) for v in n[k])
        return out
    raise ValueError(f"unknown score method {method!r}")


def score(ds: DiscreteDataset, graph: CausalGraph, method: str = "bic", ess: float = 1.0) -> float:
    """Network score: sum of family scores over all nodes. Higher is better."""
    topological_order(graph)
    return sum(
        family_score(ds, node, tuple(sorted(graph.parents(node))), method=method, ess=ess)
        for node in graph.nodes
    )


# --- BayesNet JSON ------------------------------------------------------------

def net_to_json(net: BayesNet) -> dict:
    from .graph import graph_to_json

    return {
        "graph": graph_to_json(net.graph),
        "cpts": [
            {
                "child": c.child,
                "parents": list(c.parents),
                "parent_cards": list(c.parent_cards),
                "states": list(c.states),
                "table": c.table.tolist(),
                "uniform_rows": sorted(c.uniform_rows),
            }
            for c in (net.cpts[n] for n in sorted(net.graph.nodes))
        ],
    }


def net_from_json(obj: dict) -> BayesNet:
    from .graph import graph_from_json
    from .errors import ParseError

    try:
        graph = graph_from_json(obj["graph"])
        cpts = {
            c["child"]: Cpt(
                child=c["child"],
                parents=tuple(c["parents"]),
                parent_cards=tuple(c["parent_cards"]),
                states=tuple(c["states"]),
                table=np.asarray(c["table"], dtype=np.float64),
                uniform_rows=frozenset(c.get("uniform_rows", ())),
            )
            for c in obj["cpts"]
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed net JSON: {exc}") from None
    return BayesNet(graph=graph, cpts=cpts)
