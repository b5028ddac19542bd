import numpy as np
import pytest
from hypothesis import given, strategies as st

from twistfission.twisted import (Automorphism, TwistedElement, compose, in_twist_coset,
                                  matrix_from_json, matrix_to_json, twisted_conjugate)

seeds = st.integers(min_value=0, max_value=10 ** 6)


def rand_gl(rng, n):
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) + 2 * np.eye(n)


def rand_auto(rng, n, kind):
    if kind == "id":
        return Automorphism.identity()
    if kind == "inner":
        return Automorphism.inner(rand_gl(rng, n))
    return Automorphism.outer_auto(rand_gl(rng, n))


def embed(x: TwistedElement, n: int) -> np.ndarray:
    """Faithful 2N x 2N model of GL_N x| <Ad, tau>:
    (g, 1) -> diag(g, g^-T), Ad_A -> diag(A, A^-T), tau -> block swap."""
    g, phi = x.g, x.phi
    A = np.eye(n) if phi.A is None else phi.A
    Z = np.zeros((n, n))
    out = np.block([[g, Z], [Z, np.linalg.inv(g).T]]) @ np.block([[A, Z], [Z, np.linalg.inv(A).T]])
    if phi.outer:
        out = out @ np.block([[Z, np.eye(n)], [np.eye(n), Z]])
    return out


kinds = st.sampled_from(["id", "inner", "outer"])


def test_untwisted_product(rng):
    g, h = rand_gl(rng, 3), rand_gl(rng, 3)
    c = compose(TwistedElement(g), TwistedElement(h))
    assert np.allclose(c.g, g @ h) and c.phi.is_identity()


def test_twist_times_inverse_twist(rng):
    phi = Automorphism.inner(rand_gl(rng, 2))
    c = compose(TwistedElement(np.eye(2), phi), TwistedElement(np.eye(2), phi.inverse()))
    assert np.allclose(c.g, np.eye(2)) and c.phi.is_identity(1e-10)


def test_inner_composition_is_matrix_product(rng):
    P1, P2 = rand_gl(rng, 3), rand_gl(rng, 3)
    assert (Automorphism.inner(P1) @ Automorphism.inner(P2)).same_as(Automorphism.inner(P1 @ P2), 1e-10)


def test_size_mismatch(rng):
    with pytest.raises(ValueError):
        compose(TwistedElement(np.eye(2)), TwistedElement(np.eye(3)))
    with pytest.raises(ValueError):
        twisted_conjugate(np.eye(3), TwistedElement(np.eye(2)))


@given(seeds, kinds, kinds)
def test_compose_matches_block_model(seed, k1, k2):
    rng = np.random.default_rng(seed)
    n = 2
    a = TwistedElement(rand_gl(rng, n), rand_auto(rng, n, k1))
    b = TwistedElement(rand_gl(rng, n), rand_auto(rng, n, k2))
    assert np.allclose(embed(compose(a, b), n), embed(a, n) @ embed(b, n))
    # and as transformations of the trivial torsor p -> g phi(p)
    p = rand_gl(rng, n)
    assert np.allclose(compose(a, b).act(p), a.act(b.act(p)))


@given(seeds, kinds)
def test_automorphisms_are_homomorphisms(seed, kind):
    rng = np.random.default_rng(seed)
    phi = rand_auto(rng, 3, kind)
    g, h = rand_gl(rng, 3), rand_gl(rng, 3)
    assert np.allclose(phi.apply(np.eye(3)), np.eye(3))
    assert np.allclose(phi.apply(g @ h), phi.apply(g) @ phi.apply(h))
    assert np.allclose(phi.inverse().apply(phi.apply(g)), g)


@given(seeds, kinds, kinds, kinds)
def test_compose_is_associative(seed, k1, k2, k3):
    rng = np.random.default_rng(seed)
    a, b, c = (TwistedElement(rand_gl(rng, 3), rand_auto(rng, 3, k)) for k in (k1, k2, k3))
    left, right = compose(compose(a, b), c), compose(a, compose(b, c))
    assert np.abs(left.g - right.g).max() <= 1e-12 * np.abs(left.g).max() * 10
    assert left.phi.same_as(right.phi, 1e-9)


def test_twisted_conjugate_examples(rng):
    x = TwistedElement(rand_gl(rng, 3), Automorphism.inner(rand_gl(rng, 3)))
    assert np.allclose(twisted_conjugate(np.eye(3), x).g, x.g)
    h, g = rand_gl(rng, 3), rand_gl(rng, 3)
    assert np.allclose(twisted_conjugate(h, TwistedElement(g)).g, h @ g @ np.linalg.inv(h))
    P = rand_gl(rng, 3)
    y = twisted_conjugate(h, TwistedElement(g, Automorphism.inner(P)))
    # (h g P h^-1 P^-1): conjugate gP by h, then peel off P on the right
    assert np.allclose(y.g, h @ (g @ P) @ np.linalg.inv(h) @ np.linalg.inv(P))


@given(seeds, kinds)
def test_twisted_conjugation_is_a_left_action(seed, kind):
    rng = np.random.default_rng(seed)
    x = TwistedElement(rand_gl(rng, 3), rand_auto(rng, 3, kind))
    h1, h2 = rand_gl(rng, 3), rand_gl(rng, 3)
    lhs = twisted_conjugate(h1, twisted_conjugate(h2, x)).g
    assert np.allclose(lhs, twisted_conjugate(h1 @ h2, x).g)


@given(seeds)
def test_twisted_power_spectrum_is_conjugation_invariant(seed):
    rng = np.random.default_rng(seed)
    n = 3
    P = np.roll(np.eye(n), 1, axis=0)  # phi^3 = id
    x = TwistedElement(rand_gl(rng, n), Automorphism.inner(P))
    assert x.power(3).phi.is_identity(1e-10)
    y = twisted_conjugate(rand_gl(rng, n), x)
    ev = lambda z: np.sort_complex(np.linalg.eigvals(z.power(3).g))
    assert np.allclose(ev(x), ev(y), atol=1e-8 * max(1, np.abs(ev(x)).max()))


def test_coset_examples(rng):
    n = 2
    swap = np.block([[np.zeros((n, n)), np.eye(n)], [np.eye(n), np.zeros((n, n))]])
    assert in_twist_coset(swap, [n, n], swap)
    M = np.block([[np.zeros((n, n)), rand_gl(rng, n)], [rand_gl(rng, n), np.zeros((n, n))]])
    assert in_twist_coset(M, [n, n], swap)
    assert not in_twist_coset(rand_gl(rng, 2 * n), [n, n], swap)
    # singular blocks are not in the group
    S = swap.copy()
    S[0, 2] = 0
    assert not in_twist_coset(S, [n, n], swap)


@given(seeds)
def test_coset_closure_and_torsor(seed):
    rng = np.random.default_rng(seed)
    blocks = [1, 2, 1]
    P = np.zeros((4, 4))
    # blocks permuted 0 -> 2 -> 0 with the middle block fixed
    P[3, 0] = P[0, 3] = 1
    P[1:3, 1:3] = np.eye(2)

    def levi():
        h = np.zeros((4, 4), dtype=complex)
        h[0, 0], h[3, 3] = rng.normal() + 2, rng.normal() - 2
        h[1:3, 1:3] = rand_gl(rng, 2)
        return h

    M1, M2 = levi() @ P, levi() @ P
    assert in_twist_coset(M1, blocks, P)
    assert in_twist_coset(levi() @ M1, blocks, P)
    assert in_twist_coset(P @ levi(), blocks, P)
    assert in_twist_coset(M1 @ levi(), blocks, P)
    # two members differ by a left Levi factor
    D = M2 @ np.linalg.inv(M1)
    assert in_twist_coset(D, blocks, np.eye(4))


def test_matrix_json_round_trip(rng):
    g = rand_gl(rng, 3)
    assert np.array_equal(matrix_from_json(matrix_to_json(g)), g)
