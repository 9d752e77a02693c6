import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mzsphere.harmonics import KernelSpec, dim_pi, kernel_matrix
from mzsphere.mzframe import (
    certify_interpolation,
    certify_mz,
    frame_matrix,
    interpolation_threshold,
    mz_constant_p2,
    mz_estimate_p,
    reindex_family,
    riesz_bounds,
    sym_eigs,
)
from mzsphere.specfun import bessel_first_zero, jacobi_eval
from mzsphere.sphere import (
    ArrayFamily,
    PointConfiguration,
    gen_fibonacci,
    gen_random_uniform,
    gen_roots_of_unity,
    random_rotation,
)

import oracles
from helpers import separated_random


def every_other_roots(L):
    # L of the 2L+1 roots: gaps 2*step except one of 3*step
    return PointConfiguration(1, gen_roots_of_unity(L).points[0:2 * L:2], L)


# eigensolver ------------------------------------------------------------------------


def test_sym_eigs_identity():
    assert np.array_equal(sym_eigs(np.eye(5)), np.ones(5))


def test_sym_eigs_two_by_two():
    assert np.allclose(sym_eigs([[2.0, 1.0], [1.0, 2.0]]), [1.0, 3.0], atol=1e-15)


def test_sym_eigs_cardano_oracle():
    rng = np.random.default_rng(0)
    for _ in range(20):
        A = rng.standard_normal((3, 3))
        A = A + A.T
        assert np.allclose(sym_eigs(A), oracles.cardano_eigs(A), atol=1e-10)


def test_sym_eigs_rejects_asymmetric():
    with pytest.raises(ValueError):
        sym_eigs([[1.0, 2.0], [0.0, 1.0]])


def test_sym_eigs_nonconvergence_reported():
    A = np.random.default_rng(1).standard_normal((30, 30))
    with pytest.raises(ArithmeticError):
        sym_eigs(A + A.T, max_sweeps=1)


@pytest.mark.parametrize("backend", ["python", "compiled"])
def test_sym_eigs_backends_agree(backend):
    from mzsphere._backend import available_backends
    if backend not in available_backends():
        pytest.skip("compiled kernels not built")
    A = np.random.default_rng(2).standard_normal((40, 40))
    A = A @ A.T
    assert np.allclose(sym_eigs(A, backend=backend), np.linalg.eigvalsh(A), rtol=0, atol=1e-10 * np.linalg.norm(A))


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 25), seed=st.integers(0, 10 ** 6))
def test_sym_eigs_trace_and_order(n, seed):
    A = np.random.default_rng(seed).standard_normal((n, n))
    A = A + A.T
    ev = sym_eigs(A)
    assert np.all(np.diff(ev) >= 0)
    assert abs(ev.sum() - np.trace(A)) <= 1e-10 * max(1.0, np.abs(A).sum())


# frame and Gram matrices ---------------------------------------------------------------


def test_frame_matrix_roots_of_unity():
    assert np.allclose(frame_matrix(gen_roots_of_unity(4)), 9 * np.eye(9), atol=1e-10)


def test_frame_matrix_single_point():
    M = frame_matrix(PointConfiguration(2, [[0.0, 0.0, 1.0]], 0))
    assert M.shape == (1, 1) and M[0, 0] == pytest.approx(1.0)


def test_frame_matrix_requires_degree():
    with pytest.raises(ValueError):
        frame_matrix(gen_fibonacci(10))


def test_shared_spectrum_basis_and_kernel():
    cfg = gen_random_uniform(30, 2, seed=3).with_degree(3)
    a = sym_eigs(frame_matrix(cfg))
    b = sym_eigs(kernel_matrix(KernelSpec(2, 3), cfg.points))
    assert np.allclose(a, b[-16:], atol=1e-8)
    assert np.all(np.abs(b[:-16]) < 1e-8)


@pytest.mark.parametrize("L,m", [(2, 5), (5, 40), (8, 60), (8, 81)])
def test_spectrum_equivalence_padded(L, m):
    cfg = gen_random_uniform(m, 2, seed=L * m).with_degree(L)
    a = sym_eigs(frame_matrix(cfg))
    b = sym_eigs(kernel_matrix(KernelSpec(2, L), cfg.points))
    n = max(a.size, b.size)
    pad = lambda v: np.concatenate([np.zeros(n - v.size), v])  # noqa: E731
    assert np.allclose(pad(a), pad(b), atol=1e-8 * max(1.0, b[-1]))


def test_higher_dimension_uses_kernel_path():
    cfg = gen_random_uniform(12, 3, seed=0).with_degree(2)
    assert frame_matrix(cfg).shape == (12, 12)


# MZ constants -------------------------------------------------------------------------


@pytest.mark.parametrize("L", [1, 2, 7, 20, 64])
def test_roots_of_unity_c2_is_one(L):
    assert mz_constant_p2(gen_roots_of_unity(L)).c2 == pytest.approx(1.0, abs=1e-9)


def test_doubled_roots_give_c2_two():
    L = 6
    pts = gen_roots_of_unity(L).points
    cfg = PointConfiguration(1, np.vstack([pts, pts]), L, allow_duplicates=True)
    b = mz_constant_p2(cfg)
    assert b.c2 == pytest.approx(2.0, abs=1e-9)
    assert b.mz_lower == pytest.approx(2.0, abs=1e-9) and b.mz_upper == pytest.approx(2.0, abs=1e-9)


def test_too_few_points_is_rank_deficient():
    L = 4
    cfg = gen_random_uniform(dim_pi(2, L) - 1, 2, seed=1).with_degree(L)
    b = mz_constant_p2(cfg)
    assert math.isinf(b.c2) and b.numeric_rank < dim_pi(2, L)
    assert "not sampling" in b.note
    assert b.to_dict()["c2"] is None


def test_kernel_path_c2_matches_basis_path():
    cfg = gen_random_uniform(80, 2, seed=12).with_degree(4)
    from mzsphere.harmonics import basis_matrix
    E = basis_matrix(2, 4, cfg.points)
    ev = np.linalg.eigvalsh(E.T @ E) / 25
    assert mz_constant_p2(cfg).c2 == pytest.approx(max(ev[-1], 1 / ev[0]), rel=1e-9)


def test_c2_at_least_one():
    for seed in range(5):
        b = mz_constant_p2(gen_random_uniform(60, 2, seed=seed).with_degree(3))
        assert b.c2 >= 1.0 and b.lambda_min <= b.lambda_max


def test_rotation_invariance():
    cfg = gen_random_uniform(40, 2, seed=4).with_degree(4)
    rot = cfg.rotated(random_rotation(3, seed=9))
    assert mz_constant_p2(rot).c2 == pytest.approx(mz_constant_p2(cfg).c2, rel=1e-9)
    a, b = riesz_bounds(cfg), riesz_bounds(rot)
    assert a.lambda_min == pytest.approx(b.lambda_min, abs=1e-9)
    assert a.lambda_max == pytest.approx(b.lambda_max, abs=1e-9)


def test_removing_points_never_raises_lambda_max():
    cfg = gen_random_uniform(50, 2, seed=6).with_degree(3)
    prev = mz_constant_p2(cfg).lambda_max
    for k in range(49, 40, -1):
        cur = mz_constant_p2(cfg.subset(np.arange(k))).lambda_max
        assert cur <= prev + 1e-10
        prev = cur


# Riesz bounds -------------------------------------------------------------------------


def test_riesz_single_point():
    b = riesz_bounds(PointConfiguration(2, [[1.0, 0.0, 0.0]], 3))
    assert b.lambda_min == pytest.approx(1.0) and b.lambda_max == pytest.approx(1.0)


def test_riesz_antipodal_pair():
    cfg = PointConfiguration(2, [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]], 1)
    # lambda = (d - 2) / 2 = 0, so the kernel index is (1, 0)
    r = jacobi_eval(1.0, 0.0, 1, -1.0) / jacobi_eval(1.0, 0.0, 1, 1.0)
    assert r == pytest.approx(-0.5, abs=1e-15)
    b = riesz_bounds(cfg)
    assert b.lambda_min == pytest.approx(1 - abs(r), abs=1e-14)
    assert b.lambda_max == pytest.approx(1 + abs(r), abs=1e-14)


def test_riesz_wide_pair_tends_to_one():
    u = np.array([[0.0, 0.0, 1.0], [math.sin(1.0), 0.0, math.cos(1.0)]])
    lows = [riesz_bounds(PointConfiguration(2, u, L)).lambda_min for L in (5, 20, 80)]
    assert lows[-1] > 0.95
    for L, low in zip((5, 20, 80), lows):
        off = abs(kernel_matrix(KernelSpec(2, L), u)[0, 1]) / dim_pi(2, L)
        assert low >= 1 - off - 1e-12


def test_separated_configs_have_positive_riesz_bound():
    thr = interpolation_threshold(2)
    for L in (4, 8, 12):
        cfg = separated_random(math.ceil(0.15 * L * L), L, 1.05 * thr, seed=L)
        assert riesz_bounds(cfg).lambda_min > 0


# certificates ---------------------------------------------------------------------------


def test_threshold_values():
    assert interpolation_threshold(1) == pytest.approx(math.pi, abs=1e-10)
    assert interpolation_threshold(2) == pytest.approx(2 * bessel_first_zero(0.0), abs=1e-10)


def test_interpolation_every_other_roots_pass():
    fam = ArrayFamily.from_configs(every_other_roots(L) for L in range(1, 30))
    cert = certify_interpolation(fam)
    assert cert.verdict == "pass"
    # L = 1 keeps a single point; no pairs to separate
    assert math.isinf(cert.rows[0].L_delta)
    for L, prod, thr, margin in cert.per_degree[1:]:
        assert prod == pytest.approx(4 * math.pi * L / (2 * L + 1), rel=1e-12)
        assert margin > 0


def test_interpolation_fibonacci_sparse_pass():
    fam = ArrayFamily.build(lambda L: gen_fibonacci(math.ceil((0.5 * L) ** 2)), range(6, 41, 2))
    cert = certify_interpolation(fam)
    assert cert.verdict == "pass"
    assert cert.threshold_value == pytest.approx(2 * bessel_first_zero(0.0), abs=1e-10)


def test_interpolation_failing_degree_reports_negative_margin():
    fam = ArrayFamily.build(lambda L: gen_fibonacci(math.ceil((1.5 * L) ** 2)), [5, 10])
    cert = certify_interpolation(fam)
    assert cert.verdict == "fail"
    assert all(r.margin < 0 for r in cert.rows)


def test_interpolation_theta_below_threshold_fails():
    fam = ArrayFamily.from_configs(every_other_roots(L) for L in range(1, 6))
    assert certify_interpolation(fam, theta=3.0).verdict == "fail"


def test_interpolation_invariant_under_rotation_and_permutation():
    fam = ArrayFamily.build(lambda L: gen_fibonacci(math.ceil((0.6 * L) ** 2)), range(5, 25, 5))
    q = random_rotation(3, seed=1)
    perm = ArrayFamily.from_configs(
        PointConfiguration(2, c.rotated(q).points[::-1], c.degree) for c in fam)
    a, b = certify_interpolation(fam), certify_interpolation(perm)
    assert a.verdict == b.verdict
    assert np.allclose([r.margin for r in a.rows], [r.margin for r in b.rows], atol=1e-12)


def test_empty_family_rejected():
    with pytest.raises(ValueError):
        certify_mz(ArrayFamily(2, {}))
    with pytest.raises(ValueError):
        certify_interpolation(ArrayFamily(2, {}))


def test_mz_roots_of_unity_pass():
    cert = certify_mz(ArrayFamily.build(gen_roots_of_unity, range(0, 40)))
    assert cert.verdict == "pass"
    assert cert.threshold_value == math.pi / 2
    for r in cert.rows:
        assert r.L_rho_certified == pytest.approx(r.L * math.pi / (2 * r.L + 1), abs=1e-12)


def test_mz_removed_cap_fails():
    L = 10
    cfg = gen_fibonacci(math.ceil((2.5 * L) ** 2))
    keep = cfg.points[:, 2] < math.cos(0.2)  # cap radius 0.2 > pi / (2L)
    holed = PointConfiguration(2, cfg.points[keep], L)
    fam = ArrayFamily.from_configs([gen_fibonacci(math.ceil((2.5 * 8) ** 2), 8), holed])
    cert = certify_mz(fam)
    assert cert.verdict == "fail"
    assert cert.rows[-1].margin < 0


def test_mz_reports_uniform_separation_floor():
    fam = ArrayFamily.build(gen_roots_of_unity, range(0, 5))
    cert = certify_mz(fam, eps=10.0)
    assert cert.verdict == "fail"
    assert not cert.conditions["uniformly_separated"]
    # (L + 1) * 2 pi / (2L + 1) decreases in L
    assert cert.params["separation_infimum"] == pytest.approx(5 * 2 * math.pi / 9, rel=1e-12)


def test_certificate_csv_schema():
    cert = certify_mz(ArrayFamily.build(gen_roots_of_unity, range(0, 4)))
    rows = list(csv.reader(io.StringIO(cert.to_csv())))
    assert rows[0] == ["L", "m_L", "L_delta", "L_rho_certified", "threshold", "margin", "verdict"]
    assert [r[0] for r in rows[1:]] == ["0", "1", "2", "3"]
    assert all(r[-1] == "pass" for r in rows[1:])


# estimates and re-indexing -------------------------------------------------------------------


def test_p2_estimate_bounded_by_exact_roots():
    assert mz_estimate_p(gen_roots_of_unity(7), 2, samples=300, seed=1) <= 1 + 1e-6


def test_p2_estimate_lower_bounds_exact():
    for seed in range(20):
        cfg = gen_random_uniform(40, 2, seed=seed).with_degree(3)
        assert mz_estimate_p(cfg, 2, samples=50, seed=seed) <= mz_constant_p2(cfg).c2 + 1e-9


def test_pinf_single_point_blows_up():
    cfg = PointConfiguration(2, [[0.0, 0.0, 1.0]], 2)
    assert mz_estimate_p(cfg, math.inf, samples=1000, seed=0) > 10


def test_p_estimate_other_exponents_finite():
    cfg = gen_fibonacci(200, 6)
    for p in (1.0, 3.0):
        assert 1.0 <= mz_estimate_p(cfg, p, samples=40, seed=2) < 50


def test_reindex_identity():
    fam = ArrayFamily.build(gen_roots_of_unity, range(0, 8))
    out = reindex_family(fam, 0)
    assert out.degrees == fam.degrees
    assert all(np.array_equal(out[L].points, fam[L].points) for L in fam.degrees)


def test_reindex_doubling():
    fam = ArrayFamily.build(gen_roots_of_unity, range(0, 13))
    out = reindex_family(fam, 1, degrees=[3])
    assert out[3].m == gen_roots_of_unity(6).m and out[3].degree == 3


def test_reindex_missing_source():
    fam = ArrayFamily.build(gen_roots_of_unity, range(0, 5))
    with pytest.raises(KeyError):
        reindex_family(fam, 0.5, degrees=[4])


@pytest.mark.parametrize("delta", [0.5, 0.25, -0.2, 1 / 3])
def test_reindex_composition(delta):
    from fractions import Fraction
    fam = ArrayFamily.build(gen_roots_of_unity, range(0, 41))
    once = reindex_family(fam, delta)
    back = reindex_family(once, -delta / (1 + delta))
    q = Fraction(delta).limit_denominator(10 ** 9)
    inv = -q / (1 + q)
    for L in back.degrees:
        mid = math.floor((1 + inv) * L)
        src = math.floor((1 + q) * mid)
        assert np.array_equal(back[L].points, fam[src].points)
        if src == L:
            assert back[L].m == fam[L].m
