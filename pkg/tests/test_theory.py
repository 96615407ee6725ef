import csv

import numpy as np
import pytest

from plbag.core import (
    Atom,
    BagGenMatrix,
    DiscreteDistribution,
    LabelDistribution,
    LabelSpace,
    argmax_set,
    bag_frequencies_at,
    bag_marginal,
    bayes_rule,
    label_frequencies,
)
from plbag.theory import (
    RelaxedSpec,
    advantage,
    advantage_report,
    check_relaxed,
    find_ambiguous_pair,
    flip_distribution,
    is_label_aligned_dist,
    is_label_aligned_process,
    is_reconstructible,
    simplex_vertices,
)

from _fixtures import (
    aligned_point_dist,
    deficient_baggen,
    misaligned_point_dist,
    random_baggen,
    random_discrete_distribution,
    random_label_dist,
    single_atom,
)


def mixed_identity_full(c: int, w: float = 0.9) -> BagGenMatrix:
    """Singleton of the truth with probability w, else the full set."""
    entries = w * BagGenMatrix.identity(c).entries + (1 - w) * BagGenMatrix.constant_full(c).entries
    return BagGenMatrix(entries)


def advantage_oracle(d: DiscreteDistribution, atom_index: int, mass_cap: float = 1.0) -> float:
    """Independent brute force over (radius, mass level) pairs.

    Recomputes ball frequencies from scratch and scans every interval
    endpoint plus a ten-times finer grid of mass levels.
    """
    c = d.label_space.c
    freqs = np.stack([label_frequencies(bag_marginal(d, i)) for i in range(d.n_atoms)])
    here = freqs[atom_index]
    top = sorted(argmax_set(here))
    if len(top) == c:
        return 1.0
    rest = [y for y in range(1, c + 1) if y not in top]
    masses = d.masses()
    center = d.atoms[atom_index].location
    sqd = ((d.locations() - center[None, :]) ** 2).sum(axis=1)
    radii = np.unique(sqd)
    cums, margins = [], []
    for r in radii:
        ball = sqd <= r
        mass = float(masses[ball].sum())
        ball_freq = (masses[ball, None] * freqs[ball]).sum(axis=0) / mass
        margin = min(
            float(ball_freq[i - 1] - ball_freq[j - 1]) for i in top for j in rest
        )
        cums.append(mass)
        margins.append(margin)
    levels = {min(cm, mass_cap) for cm in cums}
    fine = mass_cap * (np.arange(1, 10 * len(radii) + 1) / (10 * len(radii)))
    levels.update(float(p) for p in fine)
    best = 0.0
    for p in sorted(levels):
        if p <= 0.0 or p > mass_cap:
            continue
        t = int(np.searchsorted(np.asarray(cums), p, side="left"))
        gamma = max(min(margins[: t + 1]), 0.0)
        best = max(best, p * gamma * gamma)
    return best


class TestReconstructible:
    def test_identity_process(self):
        assert is_reconstructible(BagGenMatrix.identity(3))

    def test_constant_process(self):
        assert not is_reconstructible(BagGenMatrix.constant_full(3))

    def test_permutation_process(self):
        assert is_reconstructible(BagGenMatrix.permutation([3, 1, 2]))

    def test_mixed_process(self):
        assert is_reconstructible(mixed_identity_full(4))


class TestAmbiguousPair:
    def test_constant_pair_is_vertex_pair(self):
        pair = find_ambiguous_pair(BagGenMatrix.constant_full(2))
        assert pair is not None
        q1, q2 = pair
        assert {q1.argmax_set(), q2.argmax_set()} == {frozenset({1}), frozenset({2})}

    def test_identity_has_no_pair(self):
        assert find_ambiguous_pair(BagGenMatrix.identity(3)) is None

    def test_roundtrip_property(self):
        # reconstructible <=> no ambiguous pair; returned pairs share the
        # bag marginal and disagree on the argmax
        rng = np.random.default_rng(33)
        for trial in range(200):
            c = int(rng.integers(2, 7))
            m = random_baggen(rng, c) if trial % 2 == 0 else deficient_baggen(rng, c)
            pair = find_ambiguous_pair(m)
            assert (pair is None) == is_reconstructible(m)
            if pair is not None:
                q1, q2 = pair
                gap = np.abs(m.entries @ (q1.probs - q2.probs)).max()
                assert gap <= 1e-7
                assert q1.argmax_set() != q2.argmax_set()


class TestAlignmentDist:
    def test_aligned_fixture(self):
        assert is_label_aligned_dist(aligned_point_dist())

    def test_misaligned_fixture(self):
        assert not is_label_aligned_dist(misaligned_point_dist())

    def test_identity_process_always_aligned(self):
        rng = np.random.default_rng(37)
        for _ in range(10):
            d = single_atom(rng.dirichlet(np.ones(4)), BagGenMatrix.identity(4))
            assert is_label_aligned_dist(d)


class TestAlignmentProcess:
    def test_identity_aligned(self):
        probe = is_label_aligned_process(BagGenMatrix.identity(3), n_probes=200)
        assert probe.aligned_so_far and probe.counterexample is None

    def test_scaled_identity_aligned(self):
        probe = is_label_aligned_process(mixed_identity_full(3), n_probes=500)
        assert probe.aligned_so_far

    def test_permutation_falsified_at_vertex(self):
        probe = is_label_aligned_process(BagGenMatrix.permutation([2, 1]), n_probes=1)
        assert not probe.aligned_so_far
        # the counterexample is a deterministic label distribution
        assert probe.counterexample.probs.max() == 1.0

    def test_inclusion_process_aligned_on_vertices_only(self):
        m = BagGenMatrix.independent_inclusion(np.array([[1.0, 2 / 3], [0.0, 1.0]]))
        vertex_only = is_label_aligned_process(m, probes=simplex_vertices(2))
        assert vertex_only.aligned_so_far
        full = is_label_aligned_process(m, n_probes=100)
        assert not full.aligned_so_far


class TestCorollaryDirection:
    def test_probed_aligned_implies_reconstructible(self):
        rng = np.random.default_rng(41)
        processes = [
            BagGenMatrix.identity(3),
            mixed_identity_full(3, 0.8),
            mixed_identity_full(4, 0.5),
            BagGenMatrix.constant_full(3),
            BagGenMatrix.permutation([2, 3, 1]),
        ] + [random_baggen(rng, int(rng.integers(2, 5))) for _ in range(30)]
        passed = 0
        for m in processes:
            probe = is_label_aligned_process(m, n_probes=300, seed=5)
            if probe.aligned_so_far:
                passed += 1
                assert is_reconstructible(m)
        assert passed >= 3  # the implication was exercised, not vacuous


class TestAdvantage:
    def test_single_atom_margin(self):
        d = single_atom([0.6, 0.4], BagGenMatrix.identity(2))
        entry = advantage(d, 0, mass_cap=1.0)
        assert entry.advantage == pytest.approx(0.04, abs=1e-12)
        assert entry.p == pytest.approx(1.0)
        assert entry.gamma == pytest.approx(0.2, abs=1e-12)
        assert entry.top_labels == (1,)

    def test_full_tie_has_advantage_one(self):
        d = single_atom([0.5, 0.5], BagGenMatrix.identity(2))
        entry = advantage(d, 0)
        assert entry.advantage == 1.0
        assert entry.p is None and entry.gamma is None

    def test_two_atom_line(self):
        m = BagGenMatrix.identity(2)
        atoms = (
            Atom(np.array([0.0]), 0.5, LabelDistribution(np.array([0.9, 0.1])), m),
            Atom(np.array([1.0]), 0.5, LabelDistribution(np.array([0.1, 0.9])), m),
        )
        d = DiscreteDistribution(atoms, LabelSpace(2))
        entry = advantage(d, 0, mass_cap=1.0)
        assert entry.advantage == pytest.approx(0.32, abs=1e-12)
        assert entry.p == pytest.approx(0.5)
        assert entry.gamma == pytest.approx(0.8, abs=1e-12)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(43)
        for _ in range(25):
            d = random_discrete_distribution(rng, n_atoms=10, c=3)
            cap = float(rng.uniform(0.2, 1.0))
            for i in range(d.n_atoms):
                got = advantage(d, i, mass_cap=cap).advantage
                assert got == pytest.approx(advantage_oracle(d, i, cap), abs=1e-9)

    def test_positive_for_aligned_distinct_argmax(self):
        rng = np.random.default_rng(47)
        for _ in range(10):
            masses = rng.dirichlet(np.ones(5))
            atoms = tuple(
                Atom(
                    rng.normal(size=2),
                    float(masses[i]),
                    random_label_dist(rng, 3),
                    BagGenMatrix.identity(3),
                )
                for i in range(5)
            )
            d = DiscreteDistribution(atoms, LabelSpace(3))
            for i in range(5):
                if len(argmax_set(bag_frequencies_at(d, i))) < 3:
                    assert advantage(d, i).advantage > 0.0

    def test_report_serialization(self, tmp_path):
        d = random_discrete_distribution(np.random.default_rng(53), 4, 3)
        report = advantage_report(d)
        text = report.to_text()
        assert text.count("atom_index=") == 4
        path = tmp_path / "adv.csv"
        report.write_csv(path)
        with path.open() as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["atom_index", "advantage", "p", "gamma"]
        assert len(rows) == 5


class TestRelaxed:
    def test_empty_region_equals_alignment(self):
        rng = np.random.default_rng(59)
        spec = RelaxedSpec(frozenset(), theta=0.3)
        for d in (
            aligned_point_dist(),
            misaligned_point_dist(),
            random_discrete_distribution(rng, 4, 3),
        ):
            assert check_relaxed(d, spec) == is_label_aligned_dist(d)

    def test_theta_one_is_vacuous_on_region(self):
        d = misaligned_point_dist()
        assert check_relaxed(d, RelaxedSpec(frozenset({0}), theta=1.0))

    def test_zero_theta_requires_exact_argmax(self):
        # the bag-frequency winner (label 1) is not in the exact argmax {3}
        d = misaligned_point_dist()
        assert not check_relaxed(d, RelaxedSpec(frozenset({0}), theta=0.0))

    def test_small_gap_is_tolerated(self):
        # frequencies favor label 2 while probabilities barely favor label 1
        d = single_atom([0.52, 0.48], BagGenMatrix.permutation([2, 1]))
        assert not is_label_aligned_dist(d)
        assert check_relaxed(d, RelaxedSpec(frozenset({0}), theta=0.05))
        assert not check_relaxed(d, RelaxedSpec(frozenset({0}), theta=0.03))

    def test_bad_index(self):
        with pytest.raises(IndexError):
            check_relaxed(aligned_point_dist(), RelaxedSpec(frozenset({5}), 0.1))


class TestFlip:
    def test_aligned_input_unchanged(self):
        d = aligned_point_dist()
        flipped = flip_distribution(d)
        assert flipped.atoms[0] is d.atoms[0]

    def test_misaligned_fixture_flips_to_aligned(self):
        d = misaligned_point_dist()
        flipped = flip_distribution(d)
        assert is_label_aligned_dist(flipped)
        np.testing.assert_allclose(
            bag_marginal(flipped, 0), bag_marginal(d, 0), atol=1e-12
        )
        assert bayes_rule(flipped) == (frozenset({1}),)

    def test_two_atom_mixed(self):
        aligned_atom = Atom(
            np.array([0.0]),
            0.5,
            LabelDistribution(np.array([0.8, 0.1, 0.1])),
            BagGenMatrix.identity(3),
        )
        misaligned = misaligned_point_dist().atoms[0]
        shifted = Atom(np.array([1.0]), 0.5, misaligned.label_dist, misaligned.baggen)
        d = DiscreteDistribution((aligned_atom, shifted), LabelSpace(3))
        flipped = flip_distribution(d)
        for i in range(2):
            np.testing.assert_allclose(
                bag_marginal(flipped, i), bag_marginal(d, i), atol=1e-12
            )
        assert bayes_rule(flipped)[0] == bayes_rule(d)[0]
        assert bayes_rule(flipped)[1] != bayes_rule(d)[1]
        assert is_label_aligned_dist(flipped)

    def test_random_flips_align_and_preserve_marginals(self):
        rng = np.random.default_rng(61)
        for _ in range(20):
            d = random_discrete_distribution(rng, n_atoms=4, c=4)
            flipped = flip_distribution(d)
            assert is_label_aligned_dist(flipped)
            for i in range(d.n_atoms):
                np.testing.assert_allclose(
                    bag_marginal(flipped, i), bag_marginal(d, i), atol=1e-12
                )
