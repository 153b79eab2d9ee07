"""Synthetic historian generation by ancestral sampling from fixture nets.

The random source is a 64-bit counter-based generator (splitmix64): output
``k`` of stream ``seed`` is ``mix(seed + (k+1) * 0x9E3779B97F4A7C15)`` with

    z ^= z >> 30; z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27; z *= 0x94D049BB133111EB
    z ^= z >> 31

(all mod 2^64), mapped to a uniform in [0, 1) via the top 53 bits. Draws
are consumed record-major; within a record, nodes are visited in
topological order and each unclamped node consumes exactly one draw,
choosing the smallest state whose inclusive CPT-row cumulative exceeds the
uniform. Fixed seed therefore means bit-identical datasets.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import UnknownVariable
from .estimation import BayesNet
from .graph import topological_order
from .ingest import ACTUATOR, SENSOR, DiscreteDataset, VariableSpec

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def uniforms(seed: int, count: int, start: int = 0) -> np.ndarray:
    """Outputs ``start .. start+count-1`` of the splitmix64 stream ``seed``."""
    ctr = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    z = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + ctr * _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


def _identity_specs(net: BayesNet) -> tuple[VariableSpec, ...]:
    return tuple(
        VariableSpec(name=n, kind=ACTUATOR, states=net.states(n))
        for n in net.graph.nodes
    )


def sample_with_clamp(net: BayesNet, n: int, seed: int,
                      clamp: Mapping[str, int] | None = None,
                      specs: tuple[VariableSpec, ...] | None = None) -> DiscreteDataset:
    """Ancestral sampling with clamped nodes forced to fixed states.

    Clamped nodes ignore their CPTs and consume no randomness; descendants
    respond through their own CPTs. ``specs`` defaults to identity
    actuator specs derived from the net.
    """
    if n < 1:
        raise ValueError("need at least one record")
    clamp = dict(clamp or {})
    for name, state in clamp.items():
        if name not in net.graph.node_set:
            raise UnknownVariable(f"no node named {name!r}")
        if not 0 <= state < net.cardinality(name):
            raise UnknownVariable(f"{name} has no state index {state}")

    order = topological_order(net.graph)
    free = [v for v in order if v not in clamp]
    u = uniforms(seed, n * len(free)).reshape(n, len(free)) if free else np.empty((n, 0))

    columns: dict[str, np.ndarray] = {}
    for name, state in clamp.items():
        columns[name] = np.full(n, state, dtype=np.int64)
    for k, node in enumerate(free):
        cpt = net.cpts[node]
        cum = np.cumsum(cpt.table, axis=1)
        if cpt.parents:
            cfg = np.ravel_multi_index(tuple(columns[p] for p in cpt.parents), cpt.parent_cards)
        else:
            cfg = np.zeros(n, dtype=np.int64)
        states = (u[:, k, None] >= cum[cfg]).sum(axis=1)
        columns[node] = np.minimum(states, cpt.cardinality - 1).astype(np.int64)

    specs = specs if specs is not None else _identity_specs(net)
    data = np.column_stack([columns[s.name] for s in specs])
    return DiscreteDataset(specs=specs, data=data)


def forward_sample(net: BayesNet, n: int, seed: int,
                   specs: tuple[VariableSpec, ...] | None = None) -> DiscreteDataset:
    """n i.i.d. records sampled in topological order from the net's CPTs."""
    return sample_with_clamp(net, n, seed, clamp=None, specs=specs)


def write_historian_csv(ds: DiscreteDataset, with_timestamp: bool = True) -> str:
    """Render a discrete dataset as the historian CSV data_ingest consumes.

    Sensor states are emitted as a representative raw value inside the
    state's interval (bin midpoints; one unit beyond the outermost edges),
    actuator states as their declared codes, so discretizing the output
    through the same specs reproduces the dataset exactly.
    """
    rep: list[list[str]] = []
    for spec in ds.specs:
        if spec.kind == SENSOR:
            e = spec.bin_edges
            vals = [e[0] - 1.0]
            vals += [(a + b) / 2.0 for a, b in zip(e, e[1:])]
            vals.append(e[-1] + 1.0)
            rep.append([repr(v) for v in vals])
        else:
            codes = spec.codes if spec.codes is not None else tuple(range(len(spec.states)))
            rep.append([str(c) for c in codes])

    buf = io.StringIO()
    header = (["Timestamp"] if with_timestamp else []) + list(ds.names)
    buf.write(",".join(header) + "\n")
    for t in range(ds.n_records):
        row = [str(t)] if with_timestamp else []
        row += [rep[k][ds.data[t, k]] for k in range(len(ds.specs))]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


@dataclass(frozen=True)
class FixtureNet:
    """Ground-truth net standing in for a plant historian: the net, the
    specs that map its states to raw log values, and each DP's stage."""

    name: str
    net: BayesNet
    specs: tuple[VariableSpec, ...]
    stage_of: Mapping[str, str]

    def sample(self, n: int, seed: int, clamp: Mapping[str, int] | None = None) -> DiscreteDataset:
        return sample_with_clamp(self.net, n, seed, clamp=clamp, specs=self.specs)
