import itertools

import numpy as np
import pytest

from romkit import InvalidArgument, InvalidState
from romkit.cover import (
    CoverSet,
    build_Ci,
    build_cover_set,
    build_Xk_family,
    cover_linear_ids,
    find_irreducible,
    minimal_feasible_solution,
    pauli_rows_of,
    poly_str,
    verify_cover,
)
from romkit.pauli import pauli_decompose, st_norm
from romkit.stabilizers import check_matrix_valid, columns_matrix

from oracles import group_projector, random_density, trace_decompose


def gf2_products(deg):
    """Every product of two polynomials of degree >= 1 with total degree ``deg``."""
    out = set()
    for da in range(1, deg):
        for a in range(1 << da, 1 << (da + 1)):
            for b in range(1 << (deg - da), 1 << (deg - da + 1)):
                p = 0
                for i in range(da + 1):
                    if (a >> i) & 1:
                        p ^= b << i
                out.add(p)
    return out


def test_irreducible_selection():
    assert find_irreducible(1) == 0b10  # x
    assert find_irreducible(3) == 0b1011  # 1 + x + x^3
    assert poly_str(find_irreducible(3)) == "1 + x + x^3"
    for n in range(2, 9):
        f = find_irreducible(n)
        reducible = gf2_products(n)
        assert f not in reducible
        # smallest: every smaller degree-n polynomial factors
        assert all(g in reducible for g in range(1 << n, f))


def test_ci_worked_example():
    C0, C1, C2 = build_Ci(3, 0b1011)
    assert np.array_equal(C0, [[1, 0, 0], [0, 0, 1], [0, 1, 0]])
    assert np.array_equal(C1, [[0, 1, 0], [1, 0, 1], [0, 1, 1]])
    assert np.array_equal(C2, [[0, 0, 1], [0, 1, 0], [1, 0, 1]])


def test_ci_rejects_reducible():
    with pytest.raises(InvalidArgument):
        build_Ci(3, 0b1001)  # 1 + x^3 = (1 + x)(1 + x + x^2)


def test_ci_nonzero_bilinear_forms():
    rng = np.random.default_rng(0)
    for n in (3, 5, 7):
        Cs = build_Ci(n, find_irreducible(n))
        for _ in range(50):
            u = rng.integers(0, 2, n)
            v = rng.integers(0, 2, n)
            if not u.any() or not v.any():
                continue
            assert any((u @ C @ v) % 2 for C in Cs)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_xk_family_spans_exhaustively(n):
    family = build_Xk_family(n)
    assert len(family) == 2**n
    assert len({m.tobytes() for m in family}) == 2**n
    assert any(not m.any() for m in family)
    for m in family:
        assert np.array_equal(m, m.T)
    for bits in range(1, 2**n):
        v = np.array([(bits >> (n - 1 - i)) & 1 for i in range(n)])
        images = sorted(tuple((m @ v) % 2) for m in family)
        assert images == sorted(itertools.product((0, 1), repeat=n))


def test_cover_n1():
    cover = build_cover_set(1)
    assert [C.labels() for C in cover.blocks] == [["Z"], ["Y"], ["X"]]


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_cover_valid(n):
    cover = build_cover_set(n)
    assert len(cover.blocks) == (4**n - 1) // (2**n - 1) == 2**n + 1
    assert all(check_matrix_valid(C) for C in cover.blocks)
    assert verify_cover(cover)


def test_cover_exactly_once_by_row_sets():
    n = 3
    rows = [pauli_rows_of(C) - {0} for C in build_cover_set(n).blocks]
    union = set().union(*rows)
    assert union == set(range(1, 4**n))
    assert sum(len(r) for r in rows) == 4**n - 1


def test_verify_cover_detects_broken_sets():
    cover = build_cover_set(3)
    assert not verify_cover(CoverSet(3, cover.blocks[:-1]))
    assert not verify_cover(CoverSet(3, cover.blocks + cover.blocks[:1]))


def test_cover_linear_ids_match_blocks():
    n = 2
    ids = cover_linear_ids(n)
    assert len(set(ids.tolist())) == len(ids) == (2**n + 1) * 2**n
    mat = columns_matrix(n, ids).toarray()
    for j, C in enumerate(build_cover_set(n).blocks):
        for d in range(2**n):
            proj = group_projector(C.x_rows, C.z_rows, n, d)
            assert np.allclose(mat[:, j * 2**n + d], trace_decompose(proj))


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_maximally_mixed_closed_form(n):
    b = np.zeros(4**n)
    b[0] = 1
    dec = minimal_feasible_solution(b)
    assert np.allclose(dec.weights, 1 / (2**n * (2**n + 1)))
    assert dec.r_fwht == pytest.approx(1.0)
    assert dec.residual_inf <= 1e-15


def test_feasible_solution_dense_oracle_n2():
    n = 2
    rng = np.random.default_rng(1)
    cover = build_cover_set(n)
    b = pauli_decompose(random_density(n, rng))
    dec = minimal_feasible_solution(b)
    recon = np.zeros(4**n)
    for j, C in enumerate(cover.blocks):
        for d in range(2**n):
            recon += dec.weights[j, d] * trace_decompose(group_projector(C.x_rows, C.z_rows, n, d))
    assert np.max(np.abs(recon - b)) <= 1e-12
    assert dec.r_fwht == pytest.approx(np.abs(dec.weights).sum())
    assert len(dec.entries()) == np.count_nonzero(dec.weights)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_feasibility_and_bound_chain(n):
    rng = np.random.default_rng(10 + n)
    for _ in range(20 if n <= 4 else 5):
        b = pauli_decompose(random_density(n, rng))
        dec = minimal_feasible_solution(b)
        assert dec.residual_inf <= 1e-9
        s = st_norm(b)
        assert s - 1e-12 <= dec.r_fwht <= 2**n * s + 1e-12


def test_large_n_without_weights():
    rng = np.random.default_rng(2)
    b = pauli_decompose(random_density(7, rng))
    full = minimal_feasible_solution(b)
    lean = minimal_feasible_solution(b, check=False, keep_weights=False)
    assert lean.weights is None and lean.residual_inf is None
    assert lean.r_fwht == pytest.approx(full.r_fwht, rel=1e-12)
    assert lean.as_dict() == {"r_fwht": lean.r_fwht, "residual_inf": None, "blocks": 129}


def test_feasible_rejects_bad_trace():
    with pytest.raises(InvalidState):
        minimal_feasible_solution(np.array([0.5, 0, 0, 0]))
