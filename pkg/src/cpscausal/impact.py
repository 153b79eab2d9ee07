"""Attack specifications, taxonomy, and impact discovery over a fitted net.

An attack targets a set of DPs. Impact discovery walks the targeted DPs'
1-hop neighbours in the learnt graph (outgoing edges by default) and asks,
for each neighbour, whether observing some state of the neighbour pins
down some state of the targeted DP with confidence at least theta. The
neighbour joins the impacted set when the maximizing posterior clears the
threshold.

Attacks are classified by how many plant stages the targeted and impacted
DPs span (TSIS / TSIM / TMIS / TMIM). Since the targeted DPs count as
impacted by definition, the impact span is measured over the union of the
two sets.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import ParseError, TargetNotInNet, UnknownNode, UnknownStage, UnknownVariable, ZeroProbabilityEvidence
from .estimation import BayesNet
from .graph import CONTROL, PHYSICAL, CausalGraph, Edge
from .inference import Query, posterior

CHILDREN = "children"
UNDIRECTED = "undirected_neighbors"

_STAGE_RE = re.compile(r"^[A-Za-z]+(\d+)$")


@dataclass(frozen=True)
class AttackSpec:
    id: str
    targeted: tuple[str, ...]
    preconditions: Mapping[str, str] = field(default_factory=dict)
    description: str = ""
    theta: float | None = None  # per-attack override of the run threshold

    def __post_init__(self):
        if not self.targeted:
            raise ParseError(f"attack {self.id!r}: targeted set must be non-empty")
        if self.theta is not None and not 0 < self.theta <= 1:
            raise ParseError(f"attack {self.id!r}: theta must be in (0, 1]")


@dataclass(frozen=True)
class ImpactConfig:
    theta: float = 0.9
    candidate_rule: str = CHILDREN
    condition_preconditions: bool = False  # experimental: add preconditions as evidence

    def __post_init__(self):
        if not 0 < self.theta <= 1:
            raise ValueError(f"theta must be in (0, 1], got {self.theta}")
        if self.candidate_rule not in (CHILDREN, UNDIRECTED):
            raise ValueError(f"candidate_rule must be {CHILDREN!r} or {UNDIRECTED!r}")


@dataclass(frozen=True)
class CandidateFinding:
    """Best (target state, candidate state) pair for one candidate DP."""

    candidate: str
    target: str
    target_state: str
    candidate_state: str
    probability: float
    included: bool


@dataclass(frozen=True)
class ImpactReport:
    attack_id: str
    theta: float
    findings: tuple[CandidateFinding, ...]
    impacted: tuple[str, ...]
    category: str | None


def stage_from_name(name: str) -> str | None:
    """Stage id from the plant naming convention: the first digit of the
    numeric suffix (MV101 -> 1, AIT202 -> 2). None when underivable."""
    m = _STAGE_RE.match(name)
    return m.group(1)[0] if m else None


def classify_attack(a: AttackSpec, impacted: Iterable[str], stage_of: Mapping[str, str]) -> str:
    """TSIS / TSIM / TMIS / TMIM by stage span.

    The target span counts the targeted DPs' stages; the impact span counts
    the stages of targeted union impacted, because an attack always impacts
    its own targets.
    """
    impacted = tuple(impacted)
    for dp in set(a.targeted) | set(impacted):
        if dp not in stage_of:
            raise UnknownStage(f"no stage recorded for {dp!r}")
    t_span = {stage_of[dp] for dp in a.targeted}
    i_span = {stage_of[dp] for dp in set(a.targeted) | set(impacted)}
    return f"T{'S' if len(t_span) == 1 else 'M'}I{'S' if len(i_span) <= 1 else 'M'}"


def discover_impact(net: BayesNet, a: AttackSpec, cfg: ImpactConfig = ImpactConfig(),
                    stage_of: Mapping[str, str] | None = None) -> ImpactReport:
    """Threshold-based impact discovery on a fitted net.

    For every candidate neighbour v_j of a targeted DP v_i, evaluates
    P(v_i = s_k | v_j = s_l) over all state pairs and keeps the maximizing
    pair; v_j is impacted when that maximum reaches theta. Candidate states
    whose evidence has probability zero are skipped. Ordering is
    deterministic: candidates lexicographic, ties on equal probability
    resolved toward the smaller (target, s_k, s_l).
    """
    missing = sorted(set(a.targeted) - set(net.graph.node_set))
    if missing:
        raise TargetNotInNet(f"attack {a.id!r}: targets not in the net: {', '.join(missing)}")
    theta = a.theta if a.theta is not None else cfg.theta

    pairs: dict[str, list[str]] = {}
    for target in sorted(set(a.targeted)):
        if cfg.candidate_rule == CHILDREN:
            hood = net.graph.children(target)
        else:
            hood = net.graph.neighbors(target)
        for cand in hood:
            if cand not in a.targeted:
                pairs.setdefault(cand, []).append(target)

    base_evidence: dict[str, int] = {}
    if cfg.condition_preconditions:
        for dp, label in a.preconditions.items():
            if dp not in net.graph.node_set:
                raise UnknownVariable(f"precondition DP {dp!r} not in the net")
            base_evidence[dp] = net.states(dp).index(label)

    findings = []
    for cand in sorted(pairs):
        scored = []  # (probability, target, s_k, s_l)
        for target in pairs[cand]:
            t_states = net.states(target)
            c_states = net.states(cand)
            for s_l in range(len(c_states)):
                evidence = dict(base_evidence)
                evidence.pop(target, None)  # preconditions may overlap the targeted set
                evidence[cand] = s_l
                try:
                    dist = posterior(net, Query(target=target, evidence=evidence))
                except ZeroProbabilityEvidence:
                    continue
                scored.extend((float(dist[s_k]), target, s_k, s_l) for s_k in range(len(t_states)))
        if not scored:
            continue
        # maximizing pair; on equal probability prefer smaller (target, s_k, s_l)
        p, target, s_k, s_l = min(scored, key=lambda r: (-r[0], r[1], r[2], r[3]))
        findings.append(CandidateFinding(
            candidate=cand,
            target=target,
            target_state=net.states(target)[s_k],
            candidate_state=net.states(cand)[s_l],
            probability=p,
            included=p >= theta,
        ))

    impacted = tuple(f.candidate for f in findings if f.included)
    category = None
    stages = dict(stage_of) if stage_of is not None else {
        dp: st for dp in set(a.targeted) | set(impacted)
        if (st := stage_from_name(dp)) is not None
    }
    try:
        category = classify_attack(a, impacted, stages)
    except UnknownStage:
        if stage_of is not None:
            raise
    return ImpactReport(attack_id=a.id, theta=theta, findings=tuple(findings),
                        impacted=impacted, category=category)


# --- domain-graph spec file ---------------------------------------------------
#
#   # comment
#   node LIT101
#   edge LIT101 -> MV101 : control

_EDGE_RE = re.compile(r"^edge\s+(\S+)\s*->\s*(\S+)\s*:\s*(control|physical)$")
_NODE_RE = re.compile(r"^node\s+(\S+)$")


def load_domain_graph(text: str) -> CausalGraph:
    """Parse the line-oriented domain-graph spec into a typed graph.

    Cycles are permitted here; acyclicity is enforced at fit and inference
    boundaries (see graph.break_cycles).
    """
    nodes: list[str] = []
    edges: list[Edge] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if m := _NODE_RE.match(line):
            nodes.append(m.group(1))
        elif m := _EDGE_RE.match(line):
            src, dst, kind = m.groups()
            for endpoint in (src, dst):
                if endpoint not in nodes:
                    raise UnknownNode(f"line {lineno}: edge references undeclared node {endpoint!r}")
            edges.append(Edge(src, dst, CONTROL if kind == "control" else PHYSICAL))
        else:
            raise ParseError(f"line {lineno}: expected 'node NAME' or 'edge SRC -> DST : control|physical'")
    return CausalGraph(nodes=tuple(nodes), edges=tuple(edges))


# --- attack file ----------------------------------------------------------------

def attacks_from_json(obj: list) -> tuple[AttackSpec, ...]:
    if not isinstance(obj, list):
        raise ParseError("attack file must be a JSON array of attack objects")
    out = []
    for rec in obj:
        try:
            out.append(AttackSpec(
                id=str(rec["id"]),
                targeted=tuple(rec["targeted"]),
                preconditions=dict(rec.get("preconditions", {})),
                description=rec.get("description", ""),
                theta=rec.get("theta"),
            ))
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed attack record: {exc}") from None
    return tuple(out)


def load_attacks(text: str) -> tuple[AttackSpec, ...]:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"attack file is not valid JSON: {exc}") from None
    return attacks_from_json(obj)


def report_to_json(report: ImpactReport) -> dict:
    return {
        "attack_id": report.attack_id,
        "theta": report.theta,
        "findings": [
            {
                "candidate": f.candidate,
                "target": f.target,
                "target_state": f.target_state,
                "candidate_state": f.candidate_state,
                "probability": f.probability,
                "included": f.included,
            }
            for f in report.findings
        ],
        "impacted": list(report.impacted),
        "category": report.category,
    }
