import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from conftest import p1h
from twistfission import qhspace as qh
from twistfission.fission import (FissionModel, FissionPoint, FissionSpace, ModelError, Tangent,
                                  nilpotent_exp, parabolic_span_check, unipotent_log)
from twistfission.presets import load_preset
from twistfission.stokes import root_sequence
from twistfission.twisted import twisted_conjugate
from twistfission.verify import unit

seeds = st.integers(min_value=0, max_value=10 ** 6)


def space_of(Q, corrupt=False):
    return FissionSpace(FissionModel.from_class(Q), corrupt=corrupt)


def _tangent(t):
    return Tangent(t[0], t[1], tuple(t[2:]))


@pytest.fixture(scope="module")
def small():
    return space_of(p1h(1, 1))


@pytest.fixture(scope="module")
def airy_space():
    return space_of(load_preset("airy"))


# -- points and action --------------------------------------------------------------

def test_model_dimensions(airy_space):
    m = airy_space.model
    assert (m.N, m.s) == (2, 3)
    assert [a.dim for a in m.stokes_algebras] == [1, 1, 1]
    assert m.dim == 4 + 2 + 3
    assert FissionModel.from_class(p1h(2, 3)).dim == 16 + 8 + 3 * 4


def test_random_points_are_valid(rng):
    for Q in (p1h(2, 3), load_preset("cuberoot"), load_preset("airy")):
        m = FissionModel.from_class(Q)
        m.validate(m.random_point(rng))


def test_validate_rejects_bad_points(small, rng):
    m = small.model
    p = m.random_point(rng)
    with pytest.raises(ModelError):
        m.validate(FissionPoint(p.C, np.eye(2), p.S))
    with pytest.raises(ModelError):
        m.validate(FissionPoint(p.C, p.h, (np.array([[1, 1], [0, 1]], dtype=complex),)))


def test_identity_action(small, rng):
    p = small.model.random_point(rng)
    q = small.action(np.eye(2), np.eye(2), p)
    assert all(np.allclose(x, y) for x, y in zip(p.as_tuple(), q.as_tuple()))


def test_group_action_moves_only_c(small, rng):
    p = small.model.random_point(rng)
    g = rng.normal(size=(2, 2)) + 2 * np.eye(2)
    q = small.action(g, np.eye(2), p)
    assert np.allclose(q.C, p.C @ np.linalg.inv(g))
    assert np.allclose(q.h, p.h) and np.allclose(q.S[0], p.S[0])


def test_levi_action_preserves_stokes_groups(rng):
    sp = space_of(p1h(2, 3))
    m = sp.model
    p = m.random_point(rng)
    k = m.levi.random_group(rng)
    q = sp.action(rng.normal(size=(4, 4)) + 3 * np.eye(4), k, p)
    m.validate(q)
    for alg, Sd in zip(m.stokes_algebras, q.S):
        # coordinates recovered from the basis reproduce the conjugated factor
        L = unipotent_log(Sd)
        assert np.allclose(alg.from_coords(alg.coords(L)), L)
    with pytest.raises(ModelError):
        sp.action(np.eye(4), rng.normal(size=(4, 4)), p)


def test_unipotent_log_exp_round_trip(rng):
    m = FissionModel.from_class(p1h(2, 3))
    for alg in m.stokes_algebras:
        X = alg.random(rng)
        assert np.abs(unipotent_log(nilpotent_exp(X)) - X).max() < 1e-12
        assert np.abs(nilpotent_exp(X) - expm(X)).max() < 1e-12


def test_stokes_products_stay_unipotent(rng):
    m = FissionModel.from_class(load_preset("cuberoot"))
    p = m.random_point(rng)
    prod = p.S[0] @ p.S[1]
    assert np.allclose(np.linalg.matrix_power(prod - np.eye(3), 3), 0)


# -- moment map -----------------------------------------------------------------------

def test_moment_at_trivial_point(small):
    P = small.model.P
    mG, mH = small.moment_map(FissionPoint(np.eye(2), P, (np.eye(2),)))
    assert np.allclose(mG.g, P)
    assert np.allclose(mH.g @ np.linalg.inv(P), np.linalg.inv(P))


def test_moment_hand_example(small):
    # the single Stokes root of this model sits at block (1, 0)
    assert small.model.stokes_basis == [((1, 0),)]
    h = np.array([[0, 1], [1, 0]], dtype=complex)
    S1 = np.array([[1, 0], [1, 1]], dtype=complex)
    mG, _ = small.moment_map(FissionPoint(np.eye(2), h, (S1,)))
    assert np.allclose(mG.g, [[1, 1], [1, 0]])


@given(seeds)
@settings(max_examples=25)
def test_moment_equivariance(seed):
    rng = np.random.default_rng(seed)
    sp = space_of(load_preset("airy"))
    m = sp.model
    p = m.random_point(rng)
    g = qh.full_algebra(2).random_group(rng)
    k = m.levi.random_group(rng)
    mG, mH = sp.moment_map(p)
    nG, nH = sp.moment_map(sp.action(g, k, p))
    assert np.allclose(nG.g, twisted_conjugate(g, mG).g, atol=1e-10 * np.abs(mG.g).max())
    assert np.allclose(nH.g, twisted_conjugate(k, mH).g, atol=1e-10 * np.abs(mH.g).max())


def _numeric_d_moment(sp, p, u, step=1e-6):
    def curve(t):
        return [np.asarray(expm(t * xi) @ x) for xi, x in zip(u, p)]
    out = []
    for m0, mp, mm in zip(sp.moment(p), sp.moment(curve(step)), sp.moment(curve(-step))):
        out.append(np.linalg.solve(m0.g, (mp.g - mm.g) / (2 * step)))
    return out


def test_d_moment_zero_tangent(small, rng):
    p = small.random_point(rng)
    assert all(not x.any() for x in small.d_moment(p, small.zero_tangent()))


@pytest.mark.parametrize("which", ["c", "eta", "all"])
def test_d_moment_matches_finite_differences(small, rng, which):
    m = small.model
    P = m.P
    if which == "c":
        p = (m.random_point(rng).C, P, np.eye(2, dtype=complex))
    else:
        p = small.random_point(rng)
    u = list(small.random_tangent(rng))
    if which == "c":
        u[1] = np.zeros_like(u[1])
        u[2] = np.zeros_like(u[2])
    elif which == "eta":
        u[0] = np.zeros_like(u[0])
        u[2] = np.zeros_like(u[2])
    u = tuple(u)
    exact = small.d_moment(p, u)
    approx = _numeric_d_moment(small, p, u)
    for a, b in zip(exact, approx):
        assert np.abs(a - b).max() < 1e-7 * max(1.0, np.abs(a).max())
    if which == "eta":
        assert np.allclose(exact[1], -np.linalg.inv(P) @ u[1] @ P)


# -- two-form ---------------------------------------------------------------------------

def _omega_oracle(sp, p, u, v, step=1e-5):
    """2 omega from finite-difference pullbacks of every term."""
    C, h, S = p[0], p[1], p[2:]

    def moved(t, w):
        return ([expm(t * w[0]) @ C, expm(t * w[1]) @ h] + [expm(t * x) @ y for x, y in zip(w[2:], S)])

    def chain(q):
        Cq, hq, Sq = q[0], q[1], q[2:]
        Cs = [Cq]
        for Sd in Sq:
            Cs.append(Sd @ Cs[-1])
        b = hq
        for Sd in reversed(Sq):
            b = b @ Sd
        return Cs, b, hq

    def forms(w):
        (Cp, bp, hp), (Cm, bm, hm) = chain(moved(step, w)), chain(moved(-step, w))
        C0, b0, h0 = chain(p)
        dC = [(x - y) / (2 * step) for x, y in zip(Cp, Cm)]
        gam = [np.linalg.solve(Ci, d) for Ci, d in zip(C0, dC)]
        gbar = [d @ np.linalg.inv(Ci) for Ci, d in zip(C0, dC)]
        beta_bar = (bp - bm) / (2 * step) @ np.linalg.inv(b0)
        eta_hat = np.linalg.solve(h0, (hp - hm) / (2 * step))
        return gam, gbar, beta_bar, eta_hat, b0

    gu, gbu, bu, eu, b = forms(u)
    gv, gbv, bv, ev, _ = forms(v)
    binv = np.linalg.inv(b)

    def pair(a_u, b_v, a_v, b_u):
        return np.trace(a_u @ b_v) - np.trace(a_v @ b_u)

    total = pair(gbu[0], b @ gbv[0] @ binv, gbv[0], b @ gbu[0] @ binv)
    total += pair(gbu[0], bv, gbv[0], bu)
    total += pair(gbu[-1], ev, gbv[-1], eu)
    for i in range(1, len(gu)):
        total -= pair(gu[i], gv[i - 1], gv[i], gu[i - 1])
    return total / 2


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_two_form_matches_pullback_oracle(small, seed):
    rng = np.random.default_rng(seed)
    p = small.random_point(rng)
    u, v = unit(small.random_tangent(rng)), unit(small.random_tangent(rng))
    assert abs(small.omega(p, u, v) - _omega_oracle(small, p, u, v)) < 1e-7


def test_two_form_oracle_on_a_larger_model(rng):
    sp = space_of(p1h(2, 3))
    p = sp.random_point(rng)
    u, v = unit(sp.random_tangent(rng)), unit(sp.random_tangent(rng))
    assert abs(sp.omega(p, u, v) - _omega_oracle(sp, p, u, v)) < 1e-6


@given(seeds, st.floats(min_value=-3, max_value=3))
@settings(max_examples=25)
def test_two_form_is_alternating_and_bilinear(seed, a):
    rng = np.random.default_rng(seed)
    sp = space_of(load_preset("airy"))
    p = sp.random_point(rng)
    u1, u2, v = (sp.random_tangent(rng) for _ in range(3))
    assert abs(sp.omega(p, u1, u1)) < 1e-12
    assert abs(sp.omega(p, u1, v) + sp.omega(p, v, u1)) < 1e-10
    combo = tuple(a * x + y for x, y in zip(u1, u2))
    lhs = sp.omega(p, combo, v)
    rhs = a * sp.omega(p, u1, v) + sp.omega(p, u2, v)
    assert abs(lhs - rhs) < 1e-12 * max(1.0, abs(lhs)) * 100


def test_typed_two_form_agrees(small, rng):
    p = small.model.random_point(rng)
    u, v = _tangent(small.random_tangent(rng)), _tangent(small.random_tangent(rng))
    assert small.two_form(p, u, v) == small.omega(p.as_tuple(), u.as_tuple(), v.as_tuple())


# -- axioms ------------------------------------------------------------------------------

@pytest.mark.parametrize("Q", [p1h(1, 1), p1h(2, 3), load_preset("airy")], ids=["p1h11", "p1h23", "airy"])
def test_axiom_residuals(Q):
    sp = space_of(Q)
    for seed in range(5):
        rng = np.random.default_rng(seed)
        p = sp.random_point(rng)
        u, v, w = (unit(sp.random_tangent(rng)) for _ in range(3))
        X = unit(sp.random_lie(rng))
        assert qh.qh1_residual(sp, p, u, v, w) < 1e-6
        assert qh.qh2_residual(sp, p, X, u) < 1e-6
        a = sp.random_group_element(rng)
        assert qh.equivariance_residual(sp, p, a) < 1e-10
        assert qh.invariance_residual(sp, p, a, u, v) < 1e-9


def test_degenerate_inputs_give_zero_residual(small, rng):
    p = small.random_point(rng)
    u, w = small.random_tangent(rng), small.random_tangent(rng)
    assert qh.qh1_residual(small, p, u, u, w) < 1e-9
    X0 = tuple(np.zeros_like(x) for x in small.random_lie(rng))
    assert qh.qh2_residual(small, p, X0, u) < 1e-12


def test_corrupted_form_fails(rng):
    sp = space_of(p1h(1, 1), corrupt=True)
    worst = 0.0
    for seed in range(5):
        r = np.random.default_rng(seed)
        p = sp.random_point(r)
        u, v, w = (unit(sp.random_tangent(r)) for _ in range(3))
        worst = max(worst, qh.qh1_residual(sp, p, u, v, w))
    assert worst > 1e-2


@pytest.mark.parametrize("Q", [p1h(1, 1), load_preset("airy")], ids=["p1h11", "airy"])
def test_nondegeneracy(Q, rng):
    sp = space_of(Q)
    rep = qh.qh3_kernel(sp, sp.random_point(rng))
    assert rep.kernel == 0
    assert rep.dim == sp.model.dim
    # omega alone is allowed to be degenerate
    assert rep.rank_omega <= rep.dim and rep.rank_dmu <= rep.dim


# -- one-level structure -------------------------------------------------------------------

def test_span_check_examples(cuberoot):
    rep = parabolic_span_check(FissionModel.from_class(p1h(1, 3)))
    assert rep.ok and rep.l == 1 and rep.half_dim == 1
    rep = parabolic_span_check(FissionModel.from_class(load_preset("airy")))
    assert rep.ok and rep.l == 1
    rep = parabolic_span_check(FissionModel.from_class(cuberoot))
    assert rep.ok and rep.l == 3 and rep.half_dim == 3
    with pytest.raises(ModelError):
        parabolic_span_check(FissionModel.from_class(load_preset("twolevel")))


@pytest.mark.parametrize("Q", [p1h(2, 3), load_preset("airy"), load_preset("cuberoot")],
                         ids=["p1h23", "airy", "cuberoot"])
def test_stokes_algebras_transport_under_the_formal_twist(Q):
    m = FissionModel.from_class(Q)
    S = m.structure
    s = m.s
    P, Pinv = m.P, np.linalg.inv(m.P)
    seq = root_sequence(S, 2 * s)
    fg = m.formal
    for d, alg in enumerate(m.stokes_algebras):
        moved = np.zeros((m.N, m.N), dtype=bool)
        for E in alg.basis():
            moved |= np.abs(Pinv @ E @ P) > 0.5
        expect = np.zeros_like(moved)
        for i, j in seq[s + d]:
            expect[fg.block_slice(i), fg.block_slice(j)] = True
        assert (moved == expect).all()
    l = parabolic_span_check(m).l
    long = root_sequence(S, s + 2 * l)
    assert all(long[j] == long[j + 2 * l] for j in range(s))
