import math

import numpy as np
import pytest
from hypothesis import given

from maxfdiv.bloch import (
    BOUNDARY,
    INSIDE,
    OUTSIDE,
    SHARD_SIZE,
    ball_samples,
    conjugate_pair_dmax,
    conjugate_pair_states,
    from_bloch,
    monte_carlo_sample,
    pair_geometry,
    region_volume_fraction,
    spheroid_membership,
    to_bloch,
)
from maxfdiv.ensembles import random_ball_point, random_density
from maxfdiv.errors import InvalidParameters, NotQubit, OutsideBall
from maxfdiv.qdiv import trace_distance
from maxfdiv.tvmax import dmax_tv_sdp, reversibility_check
from strategies import seeds


def test_bloch_examples():
    np.testing.assert_array_equal(to_bloch(np.eye(2) / 2), [0, 0, 0])
    np.testing.assert_array_equal(to_bloch(np.diag([1.0, 0.0])), [0, 0, 1])
    # |+i> has Bloch vector +y under the stated convention
    plus_i = np.array([1, 1j]) / math.sqrt(2)
    np.testing.assert_allclose(to_bloch(np.outer(plus_i, plus_i.conj())), [0, 1, 0], atol=1e-15)


@given(seed=seeds)
def test_bloch_round_trip(seed):
    v = random_ball_point(np.random.default_rng(seed))
    assert np.max(np.abs(to_bloch(from_bloch(v)) - v)) <= 1e-14
    rho = random_density(2, np.random.default_rng(seed))
    assert np.max(np.abs(from_bloch(to_bloch(rho)) - rho)) <= 1e-14


def test_bloch_errors():
    with pytest.raises(NotQubit):
        to_bloch(np.eye(3) / 3)
    with pytest.raises(OutsideBall):
        from_bloch([1.0, 0.5, 0.0])
    with pytest.raises(OutsideBall):
        spheroid_membership([0, 0, 0.5], [0, 0, 1.1])


def test_spheroid_examples():
    v = spheroid_membership([0.1, 0.2, 0.3], [0.1, 0.2, 0.3])
    assert v.member == INSIDE and v.s == pytest.approx(2 * math.sqrt(0.14))
    v = spheroid_membership([0, 0, 0.6], [0.8, 0, 0])
    assert v.member == BOUNDARY and abs(v.margin) <= 1e-15
    v = spheroid_membership([0, 0, 0.3], [1, 0, 0])
    assert v.member == OUTSIDE and v.s == pytest.approx(2 * math.sqrt(1.09), abs=1e-15)


def test_boundary_example_against_sdp():
    rho, sigma = from_bloch([0, 0, 0.6]), from_bloch([0.8, 0, 0])
    assert dmax_tv_sdp(rho, sigma).value == pytest.approx(trace_distance(rho, sigma), abs=1e-6)


def test_spheroid_matches_sdp_and_eigenvalue_test():
    rng = np.random.default_rng(0)
    checked = 0
    while checked < 500:
        rho, sigma = random_density(2, rng), random_density(2, rng)
        verdict = pair_geometry(rho, sigma)
        if abs(verdict.margin) <= 1e-6:
            continue
        checked += 1
        inside = verdict.member == INSIDE
        assert inside == (abs(dmax_tv_sdp(rho, sigma).value - trace_distance(rho, sigma)) <= 1e-6)
        rep = reversibility_check(rho, sigma)
        if not rep.boundary:
            assert inside == rep.reversible


def test_spheroid_matches_eigenvalue_test_in_the_ball():
    """Uniform Bloch-ball states, including nearly pure ones."""
    rng = np.random.default_rng(1)
    for _ in range(3000):
        v_rho, v_sigma = random_ball_point(rng), random_ball_point(rng)
        verdict = spheroid_membership(v_rho, v_sigma)
        rep = reversibility_check(from_bloch(v_rho), from_bloch(v_sigma))
        if verdict.member != BOUNDARY and not rep.boundary:
            assert (verdict.member == INSIDE) == rep.reversible


def test_volume_examples():
    assert region_volume_fraction([0, 0, 0]) == 1.0
    assert region_volume_fraction([0, 0, 1]) == 0.0
    assert region_volume_fraction([0, 0, 0.7]) == 0.51
    with pytest.raises(OutsideBall):
        region_volume_fraction([0, 0, 1.5])
    with pytest.raises(ValueError):
        region_volume_fraction([0, 0, 0.5], mode="grid")


@pytest.mark.parametrize("samples", [10_000, 100_000, 1_000_000])
def test_monte_carlo_converges(samples):
    v = [0.2, -0.3, 0.5]
    exact = region_volume_fraction(v)
    mc = region_volume_fraction(v, "monte_carlo", samples, seed=0)
    assert abs(mc - exact) <= 3 * math.sqrt(exact * (1 - exact) / samples)


def test_ball_samples_deterministic_and_shard_stable():
    a = ball_samples(SHARD_SIZE + 500, seed=3)
    assert np.array_equal(a, ball_samples(SHARD_SIZE + 500, seed=3))
    assert np.array_equal(a[:100], ball_samples(100, seed=3))
    assert not np.array_equal(a[:100], ball_samples(100, seed=4))
    assert np.all(np.einsum("ij,ij->i", a, a) <= 1.0)


def test_csv_rows():
    mc = monte_carlo_sample([0, 0, 0.7], 20, seed=0)
    rows = list(mc.csv_rows())
    assert len(rows) == 20 and [r[0] for r in rows] == list(range(20))
    for _, x, y, z, s, m in rows:
        assert m == int(s <= 2.0 + 1e-9)
        assert x * x + y * y + z * z <= 1.0


def test_conjugate_pair_examples():
    r = conjugate_pair_dmax(0.5, 0.5, 0.25)
    assert r.dmax == 1.0 and r.case == "b_ge_c"
    np.testing.assert_allclose(r.A_opt, np.diag([0.25, 0.25]))
    r = conjugate_pair_dmax(0.8, 0.2, 0.4)
    assert r.dmax == pytest.approx(2.0, abs=1e-15) and r.case == "c_ge_b"
    np.testing.assert_allclose(r.A_opt, np.zeros((2, 2)), atol=1e-15)
    r = conjugate_pair_dmax(0.7, 0.3, 0)
    assert r.dmax == 0.0
    np.testing.assert_allclose(r.A_opt, np.diag([0.7, 0.3]))
    r = conjugate_pair_dmax(1.0, 0.0, 0)
    assert r.dmax == 0.0
    np.testing.assert_allclose(r.A_opt, np.diag([1.0, 0.0]))


def test_conjugate_pair_errors():
    for a, b, c in [(0.4, 0.6, 0.1), (0.6, 0.3, 0.1), (0.6, 0.4, 0.6), (1.0, 0.0, 1e-7)]:
        with pytest.raises(InvalidParameters):
            conjugate_pair_dmax(a, b, c)


def _valid_triple(rng, branch):
    a = rng.uniform(0.5, 1.0)
    b = 1.0 - a
    top = math.sqrt(a * b)
    m = rng.uniform(0, b) if branch == 0 else rng.uniform(b, top)
    return a, b, m * np.exp(1j * rng.uniform(0, 2 * np.pi))


def test_conjugate_pair_optimizer_feasible(rng):
    for i in range(200):
        a, b, c = _valid_triple(rng, i % 2)
        r = conjugate_pair_dmax(a, b, c)
        rho, sigma = conjugate_pair_states(a, b, c)
        for m in (r.A_opt, rho - r.A_opt, sigma - r.A_opt):
            assert np.linalg.eigvalsh(m)[0] >= -1e-12
        assert r.dmax == pytest.approx(2 - 2 * np.trace(r.A_opt).real, abs=1e-12)


def test_conjugate_pair_matches_sdp(rng):
    for i in range(200):
        a, b, c = _valid_triple(rng, i % 2)
        rho, sigma = conjugate_pair_states(a, b, c)
        assert conjugate_pair_dmax(a, b, c).dmax == pytest.approx(dmax_tv_sdp(rho, sigma).value, abs=1e-7)


def test_conjugate_pair_seam():
    for b in np.linspace(0.01, 0.5, 50):
        for phase in (0.0, 1.0, 2.5):
            c = b * np.exp(1j * phase)
            r = conjugate_pair_dmax(1 - b, b, c)
            assert r.dmax == pytest.approx(2 * (b + abs(c) ** 2 / b), abs=1e-12)
            assert r.dmax == pytest.approx(4 * abs(c), abs=1e-12)


def test_conjugate_pair_branch_vs_trace_distance(rng):
    for i in range(200):
        a, b, c = _valid_triple(rng, i % 2)
        r = conjugate_pair_dmax(a, b, c)
        tv = trace_distance(*conjugate_pair_states(a, b, c))
        assert tv == pytest.approx(4 * abs(c), abs=1e-12)
        if r.case == "b_ge_c":
            assert r.dmax == pytest.approx(tv, abs=1e-12)
        elif abs(c) - b > 1e-6:
            assert r.dmax > tv + 1e-9
