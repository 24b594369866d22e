import numpy as np
import pytest

from lcqmac.errors import FieldError
from lcqmac.gf import IRREDUCIBLE_POLYS, FieldSpec, field_new, field_of_order, field_trace, is_irreducible, trace_dual_basis

SMALL_ORDERS = [2, 3, 4, 5, 7, 8, 9, 16, 25, 27]


def grids(field):
    el = np.arange(field.d)
    return np.meshgrid(el, el, indexing="ij")


def test_f2_characteristic():
    F = field_new(2, 1)
    assert F.add(1, 1) == 0


def test_f3_inverse_of_two():
    assert field_new(3, 1).inv(2) == 2


def test_f4_generator_squared():
    F = field_new(2, 2, poly=[1, 1, 1])
    assert F.mul(2, 2) == 3


@pytest.mark.parametrize("x, expected", [(2, 2), (0, 0), (1, 1)])
def test_trace_prime_field_is_identity(x, expected):
    assert field_trace(field_new(3), x) == expected


def test_trace_f4():
    F = field_new(2, 2, poly=[1, 1, 1])
    assert field_trace(F, 0) == 0
    assert field_trace(F, 2) == 1


def test_composite_modulus_rejected():
    with pytest.raises(FieldError):
        field_new(4, 1)


def test_reducible_polynomial_rejected():
    # x^2 + 1 = (x + 1)^2 over GF(2)
    with pytest.raises(FieldError):
        field_new(2, 2, poly=[1, 0, 1])


def test_missing_table_entry():
    with pytest.raises(FieldError):
        field_new(11, 3)


def test_builtin_table_is_irreducible():
    for (p, r), poly in IRREDUCIBLE_POLYS.items():
        assert len(poly) == r + 1
        assert is_irreducible(poly, p)


def test_field_of_order():
    assert field_of_order(9) == FieldSpec(3, 2)
    with pytest.raises(FieldError):
        field_of_order(12)


@pytest.mark.parametrize("q", SMALL_ORDERS + [32, 49, 64])
def test_field_axioms_exhaustive(q):
    F = field_of_order(q)
    a, b = grids(F)
    assert np.array_equal(F.add(a, b), F.add(b, a))
    assert np.array_equal(F.mul(a, b), F.mul(b, a))
    el = np.arange(q)
    for c in range(q):
        cc = np.int64(c)
        assert np.array_equal(F.add(F.add(a, b), cc), F.add(a, F.add(b, cc)))
        assert np.array_equal(F.mul(F.mul(a, b), cc), F.mul(a, F.mul(b, cc)))
        assert np.array_equal(F.mul(cc, F.add(a, b)), F.add(F.mul(cc, a), F.mul(cc, b)))
    assert np.all(F.add(el, F.neg(el)) == 0)
    nz = el[1:]
    assert np.all(F.mul(nz, F.inv(nz)) == 1)
    assert all(F.pow(int(x), q) == x for x in el)


def _mult_map_trace(F: FieldSpec, x: int) -> int:
    """Trace of the GF(p)-linear map y -> x y in the polynomial basis."""
    total = 0
    for k in range(F.r):
        image = F.mul(x, F.p**k)
        total += (image // F.p**k) % F.p
    return total % F.p


@pytest.mark.parametrize("q", SMALL_ORDERS)
def test_trace_matches_multiplication_map(q):
    F = field_of_order(q)
    for x in range(q):
        assert F.trace(x) == _mult_map_trace(F, x)


@pytest.mark.parametrize("q", [4, 8, 9, 25])
def test_trace_linearity(q):
    F = field_of_order(q)
    a, b = grids(F)
    assert np.array_equal(F.trace(F.add(a, b)), F.add(F.trace(a), F.trace(b)))
    assert F.trace(np.arange(q)).max() < F.p
    for c in range(F.p):
        assert np.array_equal(F.trace(F.mul(np.arange(q), np.int64(c))), (c * F.trace(np.arange(q))) % F.p)


@pytest.mark.parametrize("q", [4, 8, 9, 27])
def test_dual_basis_reconstructs(q):
    F = field_of_order(q)
    dual = trace_dual_basis(F)
    for y in range(q):
        acc = 0
        for k, b in enumerate(dual):
            acc = F.add(acc, F.mul(F.trace(F.mul(F.p**k, y)), b))
        assert acc == y


def test_large_extension_without_tables():
    F = FieldSpec(2, 9, poly=[1, 0, 0, 0, 1, 0, 0, 0, 0, 1])  # x^9 + x^4 + 1
    assert F._mul is None
    x = 0b101100111
    assert F.mul(x, F.inv(x)) == 1
    assert F.pow(x, F.d) == x
    arr = np.array([3, 5, 7])
    assert F.mul(arr, arr).tolist() == [F.mul(3, 3), F.mul(5, 5), F.mul(7, 7)]


def test_serialization_round_trip():
    F = field_new(2, 3)
    assert FieldSpec.from_dict(F.as_dict()) == F
    assert FieldSpec.from_dict({"p": 5, "r": 1}) == field_new(5)
