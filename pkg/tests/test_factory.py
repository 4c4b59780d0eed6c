import numpy as np
import pytest

from lstar.core import so3, verify_lstar_axiom
from lstar.errors import SpecError, TypeMismatchError
from lstar.factory import FAMILIES, FamilySpec, all_specs, expected_dim, make_algebra
from lstar.pairs import make_group_manifold_pair, pair_invariants

from conftest import SMALL_SPECS, cached_pair


def test_bdi_dims():
    pair = cached_pair("bdi", p=1, q=2)
    assert pair.algebra.dim == 3
    assert (pair.dim_k, pair.dim_p) == (1, 2)


def test_ai_compact_is_u2():
    pair = cached_pair("ai", "compact", n=2)
    assert pair.algebra.dim == 4
    assert (pair.dim_k, pair.dim_p) == (1, 3)


def test_ai_without_center():
    pair = cached_pair("ai", "compact", n=2, with_center=False)
    assert (pair.dim_k, pair.dim_p) == (1, 2)


def test_ci_one_is_sl2():
    L = make_algebra(FamilySpec("ci", "noncompact", n=1))
    assert L.dim == 3
    assert verify_lstar_axiom(L, 1e-12).passed


def test_cii_dims():
    pair = cached_pair("cii", p=1, q=1)
    assert (pair.dim_k, pair.dim_p) == (6, 4)


@pytest.mark.parametrize("family,params", SMALL_SPECS)
@pytest.mark.parametrize("sign", ["noncompact", "compact"])
def test_expected_dims_and_invariants(family, params, sign):
    spec = FamilySpec(family, sign, **params)
    pair = cached_pair(family, sign, **params)
    assert pair.algebra.dim == expected_dim(spec)
    assert pair_invariants(pair, 1e-10).passed


@pytest.mark.parametrize("family,params", SMALL_SPECS[:6])
def test_noncompact_star_is_minus_s(family, params):
    pair = cached_pair(family, "noncompact", **params)
    assert np.max(np.abs(pair.s + pair.algebra.star)) <= 1e-12


def test_scaling_moves_only_the_gram():
    a = make_algebra(FamilySpec("aiii", p=1, q=2, scale=1.0))
    b = make_algebra(FamilySpec("aiii", p=1, q=2, scale=2.0))
    assert np.array_equal(a.structure, b.structure)
    assert np.allclose(b.gram, 2.0 * a.gram, rtol=0, atol=1e-15)


def test_group_manifold_over_so3():
    pair = make_group_manifold_pair(so3())
    assert pair.dims == (6, 3, 3)
    assert pair_invariants(pair, 1e-12).passed


def test_group_manifold_over_su2():
    su2 = cached_pair("ai", "compact", n=2, with_center=False).algebra
    pair = make_group_manifold_pair(su2)
    assert pair.dims == (6, 3, 3)
    assert pair_invariants(pair, 1e-12).passed


def test_group_manifold_rejects_noncompact():
    sl2 = cached_pair("bdi", p=1, q=2).algebra
    with pytest.raises(TypeMismatchError):
        make_group_manifold_pair(sl2)


@pytest.mark.parametrize("kwargs", [
    dict(family="nope", n=2),
    dict(family="bdi", p=0, q=1),
    dict(family="ai", n=1),
    dict(family="bdiii", n=2),
    dict(family="bdi", p=1, q=2, scale=-1.0),
    dict(family="bdi", p=1, q=2, with_center=True),
])
def test_spec_errors(kwargs):
    with pytest.raises(SpecError):
        FamilySpec(**kwargs)


def test_all_specs_covers_every_family():
    fams = {s.family for s in all_specs(3)}
    assert fams == set(FAMILIES)
    assert len(FAMILIES) == 10
