import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tacbeam.nn import grad_check
from tacbeam.tac import TAC, tac_forward

from oracles import tac_formula


def _triples(tac):
    out = []
    for sub in (tac.transform, tac.average, tac.concat):
        out.append((sub.fc.W.values, sub.fc.b.values, sub.act.a.values[0]))
    return out


def test_shapes_and_dims(rng):
    tac = TAC(4, rng)
    assert tac.hidden == 12
    assert tac.concat.fc.in_dim == 24 and tac.concat.fc.out_dim == 4
    z = rng.standard_normal((3, 5, 4))
    assert tac_forward(z, tac).shape == z.shape
    with pytest.raises(ValueError):
        tac.forward(rng.standard_normal((3, 5, 6)))
    with pytest.raises(ValueError):
        tac.forward(rng.standard_normal((5, 4)))


def test_formula_oracle(rng):
    tac = TAC(4, rng, hidden=3)
    for sub in (tac.transform, tac.average, tac.concat):
        sub.act.a.values[:] = rng.uniform(0.05, 0.5)
    Z = rng.standard_normal((3, 2, 4))
    np.testing.assert_allclose(tac_forward(Z, tac), tac_formula(Z, *_triples(tac)), atol=1e-12)


def test_permutation_equivariance_all_perms(rng):
    tac = TAC(5, rng, hidden=7)
    Z = rng.standard_normal((4, 6, 5))
    out = tac_forward(Z, tac)
    for perm in itertools.permutations(range(4)):
        np.testing.assert_allclose(tac_forward(Z[list(perm)], tac), out[list(perm)], atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 6), seed=st.integers(0, 10**6))
def test_permutation_equivariance_property(n, seed):
    rng = np.random.default_rng(seed)
    tac = TAC(6, rng, hidden=9)
    Z = rng.standard_normal((2, n, 5, 6))
    perm = rng.permutation(n)
    np.testing.assert_allclose(
        tac_forward(Z[:, perm], tac), tac_forward(Z, tac)[:, perm], atol=1e-10
    )


def test_identical_channels_match_single_channel(rng):
    tac = TAC(4, rng)
    z1 = rng.standard_normal((1, 7, 4))
    out = tac_forward(np.repeat(z1, 5, axis=0), tac)
    single = tac_forward(z1, tac)
    for i in range(5):
        np.testing.assert_allclose(out[i], single[0], atol=1e-12)


def test_number_invariance(rng):
    tac = TAC(4, rng)
    before = {k: v.copy() for k, v in tac.state_dict().items()}
    for n in range(1, 7):
        assert tac_forward(rng.standard_normal((n, 3, 4)), tac).shape == (n, 3, 4)
    for k, v in tac.state_dict().items():
        np.testing.assert_array_equal(v, before[k])


def test_residual_identity(rng):
    tac = TAC(4, rng)
    tac.concat.fc.W.values[...] = 0.0
    tac.concat.fc.b.values[...] = 0.0
    Z = rng.standard_normal((3, 5, 4))
    np.testing.assert_array_equal(tac_forward(Z, tac), Z)


@pytest.mark.parametrize("seed", range(5))
def test_grad_check(seed):
    rng = np.random.default_rng(seed)
    rep = grad_check(TAC(4, rng, hidden=3), rng.standard_normal((2, 3, 2, 4)), seed=seed)
    assert rep.passed, rep.errors
