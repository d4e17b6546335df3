"""Candidate classification and decomposition-based domination probability bounds.

Bounds are always computed against one fixed (target-partition,
reference-partition) pair: decomposing the target or reference jointly with
several candidates couples their domination events, so the API takes
``Partition`` (never a whole object) for those two roles.  Only the candidate
side is enumerated over its decomposition frontier.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import check_norm_order, dominance_grid, dominates_optimal
from .model import Partition, UncertainObject

__all__ = [
    "ProbBounds",
    "DominationClassification",
    "classify",
    "pdom_bounds",
]


@dataclass(frozen=True)
class ProbBounds:
    """Probability interval [lb, ub] for one domination relation."""

    lb: float
    ub: float

    def __post_init__(self):
        if not (-1e-12 <= self.lb <= self.ub + 1e-12 and self.ub <= 1.0 + 1e-12):
            raise ValueError(f"invalid probability bounds ({self.lb}, {self.ub})")

    @property
    def width(self) -> float:
        return self.ub - self.lb


@dataclass(frozen=True)
class DominationClassification:
    """Split of the database relative to a target b and reference r.

    ``complete_dominators`` are closer than b to r in every possible world,
    ``irrelevant`` objects in none, ``influence_objects`` are undecided at the
    MBR level and are the only source of count uncertainty.  The target (and
    the reference, when it is a database object) is excluded from all groups.
    """

    complete_dominators: tuple
    influence_objects: tuple
    irrelevant: tuple

    @property
    def complete_domination_count(self) -> int:
        return len(self.complete_dominators)


def same_object(a, b) -> bool:
    return a is b or (a is not None and b is not None and a.id == b.id)


def result_length(db: Sequence[UncertainObject], b: UncertainObject) -> int:
    """Count-array size: |db| when the target is a database object, else
    |db| + 1 (an external target can be dominated by every object)."""
    in_db = any(same_object(o, b) for o in db)
    return len(db) + (0 if in_db else 1)


def classify(
    db: Sequence[UncertainObject],
    b: UncertainObject,
    r: UncertainObject,
    p: float = 2.0,
    criterion: str = "optimal",
) -> DominationClassification:
    """Classify every database object against (b, r) from the MBRs alone.

    ``criterion`` selects the decision rule: "optimal" (corner-wise, tight) or
    "minmax" (baseline, kept for comparisons; never prunes more than optimal).
    """
    p = check_norm_order(p)
    if criterion not in ("optimal", "minmax"):
        raise ValueError(f"unknown criterion {criterion!r}")
    cands = [o for o in db if not same_object(o, b) and not same_object(o, r)]
    if not cands:
        return DominationClassification((), (), ())
    a_lo = np.stack([o.mbr.lo for o in cands])
    a_hi = np.stack([o.mbr.hi for o in cands])
    if a_lo.shape[1] != b.ndim or b.ndim != r.ndim:
        raise ValueError("dimension mismatch between database, target and reference")
    b_lo, b_hi = b.mbr.lo[None, :], b.mbr.hi[None, :]
    dominates_b = dominance_grid(a_lo, a_hi, b_lo, b_hi, r.mbr.lo, r.mbr.hi, p, criterion)[:, 0]
    dominated = dominance_grid(b_lo, b_hi, a_lo, a_hi, r.mbr.lo, r.mbr.hi, p, criterion)[0, :]
    complete = tuple(o.id for o, f in zip(cands, dominates_b) if f)
    irrelevant = tuple(o.id for o, f, g in zip(cands, dominates_b, dominated) if g and not f)
    influence = tuple(o.id for o, f, g in zip(cands, dominates_b, dominated) if not f and not g)
    return DominationClassification(complete, influence, irrelevant)


def pdom_bounds(
    a: UncertainObject,
    b_part: Partition,
    r_part: Partition,
    p: float = 2.0,
    depth: int = 1,
) -> ProbBounds:
    """Bounds on P(a dominates the fixed pair (b_part, r_part)).

    The lower bound accumulates the mass of a's frontier partitions that
    dominate; the upper bound is one minus the mass of partitions that are
    themselves dominated.  Deepening a's frontier only tightens both sides.
    """
    p = check_norm_order(p)
    leaves = a.leaves_at_depth(depth)
    lb = 0.0
    dominated_mass = 0.0
    for leaf in leaves:
        if dominates_optimal(leaf.rect, b_part.rect, r_part.rect, p):
            lb += leaf.mass
        elif dominates_optimal(b_part.rect, leaf.rect, r_part.rect, p):
            dominated_mass += leaf.mass
    lb = min(lb, 1.0)
    ub = min(1.0 - dominated_mass, 1.0)
    return ProbBounds(lb, max(ub, lb))


def pdom_bounds_grid(
    a_leaves: Sequence[Partition],
    b_leaves: Sequence[Partition],
    r_leaves: Sequence[Partition],
    p: float = 2.0,
    criterion: str = "optimal",
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised pdom bounds of one candidate against every (b, r) leaf pair.

    Returns (lb, ub) arrays of shape (len(b_leaves), len(r_leaves)); one
    r-leaf is processed at a time to bound peak memory.
    """
    a_lo = np.stack([q.rect.lo for q in a_leaves])
    a_hi = np.stack([q.rect.hi for q in a_leaves])
    masses = np.array([q.mass for q in a_leaves])
    b_lo = np.stack([q.rect.lo for q in b_leaves])
    b_hi = np.stack([q.rect.hi for q in b_leaves])
    nb, nr = len(b_leaves), len(r_leaves)
    lb = np.zeros((nb, nr))
    ub = np.ones((nb, nr))
    for z, r_leaf in enumerate(r_leaves):
        dom = dominance_grid(a_lo, a_hi, b_lo, b_hi, r_leaf.rect.lo, r_leaf.rect.hi, p, criterion)
        rev = dominance_grid(b_lo, b_hi, a_lo, a_hi, r_leaf.rect.lo, r_leaf.rect.hi, p, criterion)
        lb[:, z] = masses @ dom.astype(float)
        ub[:, z] = 1.0 - rev.astype(float) @ masses
    np.minimum(lb, 1.0, out=lb)
    np.maximum(ub, lb, out=ub)
    return lb, ub
