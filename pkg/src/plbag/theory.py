"""Executable learnability diagnostics for bag generation processes.

A bag generation process is *reconstructible* when no two label
distributions that induce the same bag marginal disagree on their most
probable label; on a finite bag enumeration this reduces to linear
independence of the per-label bag-probability columns, decided here by a
singular-value ratio test.  When columns are dependent, the null space
yields an explicit ambiguous pair of label distributions.

A distribution is *label-aligned* when, at every support point, the labels
most frequent in bags coincide with the most probable labels.  Alignment of
a *process* is a universally quantified statement over all label
distributions, so only a falsifier is provided: simplex vertices, edge
midpoints and Dirichlet samples are probed for a violation.

The *advantage* of a support point quantifies how far the leading bag
frequencies stay ahead of the rest over growing neighborhoods; on finite
support it is computed exactly by enumerating the distinct ball radii.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    PROB_TOL,
    Atom,
    BagGenMatrix,
    DiscreteDistribution,
    LabelDistribution,
    argmax_set,
    bag_frequencies_at,
    label_frequencies,
)

RANK_TOL = 1e-8


def is_reconstructible(m: BagGenMatrix, tol: float = RANK_TOL) -> bool:
    """True iff the per-label bag-probability columns are linearly independent.

    Deciding by the ratio of smallest to largest singular value keeps the
    test meaningful on floating-point probabilities.
    """
    s = np.linalg.svd(m.entries, compute_uv=False)
    return bool(s[-1] > tol * s[0])


def find_ambiguous_pair(
    m: BagGenMatrix, tol: float = RANK_TOL
) -> tuple[LabelDistribution, LabelDistribution] | None:
    """Two label distributions with equal bag marginals but disjoint argmax.

    Returns None when the process is reconstructible.  Otherwise a null
    vector of the column matrix is split into its positive and negative
    parts; normalizing each part gives distributions whose marginals agree
    within ``10 * tol`` and whose argmax sets live on disjoint supports.
    """
    _, s, vt = np.linalg.svd(m.entries, full_matrices=False)
    smax = float(s[0])
    if float(s[-1]) > tol * smax:
        return None
    candidates = [vt[i] for i in range(len(s) - 1, -1, -1) if float(s[i]) <= tol * smax]
    best: tuple[LabelDistribution, LabelDistribution] | None = None
    for q in candidates:
        positive = np.clip(q, 0.0, None)
        negative = np.clip(-q, 0.0, None)
        sp, sn = float(positive.sum()), float(negative.sum())
        if sp <= tol or sn <= tol:
            continue
        q1 = LabelDistribution(positive / sp)
        q2 = LabelDistribution(negative / sn)
        if q1.argmax_set() == q2.argmax_set():
            continue
        gap = float(np.abs(m.entries @ (q1.probs - q2.probs)).max())
        if gap <= 10.0 * tol:
            return q1, q2
        if best is None:
            best = (q1, q2)
    return best


def is_label_aligned_dist(d: DiscreteDistribution, tol: float = PROB_TOL) -> bool:
    """Exact alignment check on a finite-support distribution.

    At every atom the full argmax set of the per-label bag frequencies must
    equal the full argmax set of the label probabilities.
    """
    for idx, atom in enumerate(d.atoms):
        freqs = bag_frequencies_at(d, idx)
        if argmax_set(freqs, tol) != atom.label_dist.argmax_set(tol):
            return False
    return True


@dataclass(frozen=True)
class ProcessProbe:
    """Outcome of probing a process for alignment violations.

    ``aligned_so_far`` means no probed label distribution violated
    alignment; it is evidence, not a proof, since alignment of a process
    quantifies over the whole simplex.
    """

    aligned_so_far: bool
    counterexample: LabelDistribution | None


def simplex_vertices(c: int) -> list[LabelDistribution]:
    return [LabelDistribution(np.eye(c)[i]) for i in range(c)]


def simplex_edge_midpoints(c: int) -> list[LabelDistribution]:
    out = []
    for i in range(c):
        for j in range(i + 1, c):
            probs = np.zeros(c)
            probs[i] = probs[j] = 0.5
            out.append(LabelDistribution(probs))
    return out


def is_label_aligned_process(
    m: BagGenMatrix,
    n_probes: int = 1000,
    seed: int = 0,
    probes: list[LabelDistribution] | None = None,
) -> ProcessProbe:
    """Falsify process-level alignment by probing label distributions.

    The default probe set is every simplex vertex, every edge midpoint, and
    ``n_probes`` flat-Dirichlet samples.  The first violation of alignment
    under the induced bag marginal is returned as a counterexample.
    """
    if n_probes < 1:
        raise ValueError(f"n_probes must be >= 1, got {n_probes}")
    c = m.c
    if probes is None:
        rng = np.random.default_rng(seed)
        probes = simplex_vertices(c) + simplex_edge_midpoints(c)
        draws = rng.dirichlet(np.ones(c), size=n_probes)
        probes += [LabelDistribution(row / row.sum()) for row in draws]
    for q in probes:
        freqs = label_frequencies(m.marginal(q))
        if argmax_set(freqs) != q.argmax_set():
            return ProcessProbe(False, q)
    return ProcessProbe(True, None)


@dataclass(frozen=True)
class AtomAdvantage:
    """Advantage of one support point with its witnessing (p, gamma) pair.

    ``advantage`` is 1 exactly when every label ties for the top bag
    frequency; then no witness applies and p and gamma are None.
    """

    atom_index: int
    top_labels: tuple[int, ...]
    advantage: float
    p: float | None
    gamma: float | None


def advantage(
    d: DiscreteDistribution, atom_index: int, mass_cap: float = 1.0
) -> AtomAdvantage:
    """Exact advantage of an atom by enumeration of prefix balls.

    Balls centered at the atom change content only at the distinct
    atom-to-atom distances, so each prefix ball is scored once: gamma at
    mass level p is the smallest lead of the top bag-frequency labels over
    all other labels across every ball of mass up to p, and the advantage is
    the best ``p * gamma**2`` over levels p up to ``mass_cap``.
    """
    if not 0 <= atom_index < d.n_atoms:
        raise IndexError(f"atom index {atom_index} out of range")
    if not 0.0 < mass_cap <= 1.0:
        raise ValueError(f"mass_cap must be in (0, 1], got {mass_cap}")
    c = d.label_space.c
    freqs = np.stack([bag_frequencies_at(d, i) for i in range(d.n_atoms)])
    here = freqs[atom_index]
    top = argmax_set(here)
    top_sorted = tuple(sorted(top))
    if len(top) == c:
        return AtomAdvantage(atom_index, top_sorted, 1.0, None, None)

    masses = d.masses()
    sqd = ((d.locations() - d.atoms[atom_index].location[None, :]) ** 2).sum(axis=1)
    order = np.argsort(sqd, kind="stable")
    sorted_d = sqd[order]
    boundaries = np.flatnonzero(np.diff(sorted_d) > 0)
    prefix_ends = np.append(boundaries + 1, len(order))

    top_idx = np.array(sorted(top)) - 1
    rest_idx = np.array([y - 1 for y in range(1, c + 1) if y not in top])
    cum_mass = 0.0
    weighted = np.zeros(c)
    best_val, best_p, best_gamma = 0.0, float(min(masses[atom_index], mass_cap)), 0.0
    running_gamma = np.inf
    prev_mass = 0.0
    start = 0
    for end in prefix_ends:
        for i in order[start:end]:
            cum_mass += float(masses[i])
            weighted += masses[i] * freqs[i]
        start = end
        ball_freqs = weighted / cum_mass
        margin = float(ball_freqs[top_idx].min() - ball_freqs[rest_idx].max())
        running_gamma = min(running_gamma, margin)
        if prev_mass < mass_cap:
            p_level = min(cum_mass, mass_cap)
            gamma = max(running_gamma, 0.0)
            val = p_level * gamma * gamma
            if val > best_val:
                best_val, best_p, best_gamma = val, p_level, gamma
        prev_mass = cum_mass
    return AtomAdvantage(atom_index, top_sorted, best_val, best_p, best_gamma)


@dataclass(frozen=True)
class AdvantageReport:
    """Per-atom advantage entries for a whole distribution."""

    entries: tuple[AtomAdvantage, ...]

    def to_text(self) -> str:
        lines = []
        for e in self.entries:
            lines.append(
                f"atom_index={e.atom_index} advantage={e.advantage:.12g} "
                f"p={'' if e.p is None else format(e.p, '.12g')} "
                f"gamma={'' if e.gamma is None else format(e.gamma, '.12g')} "
                f"top_labels={';'.join(str(y) for y in e.top_labels)}"
            )
        return "\n".join(lines) + "\n"

    def write_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["atom_index", "advantage", "p", "gamma"])
            for e in self.entries:
                writer.writerow(
                    [
                        e.atom_index,
                        format(e.advantage, ".12g"),
                        "" if e.p is None else format(e.p, ".12g"),
                        "" if e.gamma is None else format(e.gamma, ".12g"),
                    ]
                )


def advantage_report(d: DiscreteDistribution, mass_cap: float = 1.0) -> AdvantageReport:
    return AdvantageReport(tuple(advantage(d, i, mass_cap) for i in range(d.n_atoms)))


@dataclass(frozen=True)
class RelaxedSpec:
    """A tolerated misalignment region: atom indices plus the allowed gap."""

    g_atoms: frozenset[int]
    theta: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"theta must be in [0, 1], got {self.theta}")
        object.__setattr__(self, "g_atoms", frozenset(int(i) for i in self.g_atoms))


def near_optimal_labels(
    label_dist: LabelDistribution, theta: float, tol: float = PROB_TOL
) -> frozenset[int]:
    """Labels whose probability is within theta of the most probable one."""
    probs = label_dist.probs
    top = float(probs.max())
    return frozenset(int(i) + 1 for i in np.flatnonzero(probs >= top - theta - tol))


def check_relaxed(
    d: DiscreteDistribution, spec: RelaxedSpec, tol: float = PROB_TOL
) -> bool:
    """Alignment holds exactly outside G; inside G the top bag-frequency
    labels need only be near-optimal (within theta) for the label
    distribution."""
    for idx in spec.g_atoms:
        if not 0 <= idx < d.n_atoms:
            raise IndexError(f"relaxed-region atom index {idx} out of range")
    for idx, atom in enumerate(d.atoms):
        top_f = argmax_set(bag_frequencies_at(d, idx), tol)
        if idx in spec.g_atoms:
            if not top_f <= near_optimal_labels(atom.label_dist, spec.theta, tol):
                return False
        elif top_f != atom.label_dist.argmax_set(tol):
            return False
    return True


def flip_distribution(d: DiscreteDistribution, tol: float = PROB_TOL) -> DiscreteDistribution:
    """Swap the misaligned mass onto the bag-frequency winner, atom by atom.

    On every atom where the label argmax and the bag-frequency argmax are
    disjoint, the label probabilities of the two winners are exchanged along
    with their bag-process columns.  The bag marginal of every atom is
    unchanged (the mixture just reorders terms), while the Bayes label on
    flipped atoms moves to the bag-frequency winner, making the result
    label-aligned.
    """
    new_atoms: list[Atom] = []
    for idx, atom in enumerate(d.atoms):
        top_f = argmax_set(bag_frequencies_at(d, idx), tol)
        top_p = atom.label_dist.argmax_set(tol)
        if top_f & top_p:
            new_atoms.append(atom)
            continue
        y1 = min(top_p)
        y2 = min(top_f)
        probs = atom.label_dist.probs.copy()
        probs[[y1 - 1, y2 - 1]] = probs[[y2 - 1, y1 - 1]]
        entries = atom.baggen.entries.copy()
        entries[:, [y1 - 1, y2 - 1]] = entries[:, [y2 - 1, y1 - 1]]
        new_atoms.append(
            Atom(atom.location, atom.mass, LabelDistribution(probs), BagGenMatrix(entries))
        )
    return DiscreteDistribution(tuple(new_atoms), d.label_space)
