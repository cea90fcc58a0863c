import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import special_ortho_group

from srvolume.algebra import (
    NORMAL_FORM_GROWTH,
    FrequencySpectrum,
    GrowthVector,
    SkewMatrix,
    StructureConstants,
    classify_normal_form,
    eigenvalue_curvature,
    frequencies_of,
    growth_vector,
    hausdorff_dimension,
    normal_form_constants,
    parse_structure_constants,
    popp_coefficient_45,
    rotation_block,
)
from srvolume.exceptions import (
    DegenerateStructure,
    EigenvalueNotSimple,
    Inconsistent,
    IndexOutOfRange,
    NotBracketGenerating,
    ParseError,
    UnsupportedDimension,
)
from scipy.linalg import block_diag


def test_rotation_generator():
    spec = frequencies_of(np.array([[0.0, -1.0], [1.0, 0.0]]))
    assert spec.freqs == (1.0,)
    assert not spec.zero_mode


def test_two_blocks():
    spec = frequencies_of(block_diag(rotation_block(1.0), rotation_block(0.5)))
    assert spec.freqs == pytest.approx((1.0, 0.5), abs=1e-14)


def test_kernel_direction():
    spec = frequencies_of(block_diag(rotation_block(1.0), rotation_block(1.0), [[0.0]]))
    assert spec.freqs == pytest.approx((1.0, 1.0))
    assert spec.zero_mode
    assert spec.kind == "quasi-contact"


def test_zero_matrix_is_degenerate():
    with pytest.raises(DegenerateStructure):
        frequencies_of(np.zeros((4, 4)))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.05, 5.0), min_size=1, max_size=4), st.integers(0, 2 ** 31))
def test_frequencies_invariant_under_rotation(freqs, seed):
    L = block_diag(*[rotation_block(b) for b in freqs])
    k = L.shape[0]
    R = special_ortho_group.rvs(k, random_state=seed) if k > 1 else np.eye(1)
    spec = frequencies_of(R @ L @ R.T)
    assert spec.freqs == pytest.approx(sorted(freqs, reverse=True), rel=1e-9, abs=1e-9)


def test_spectrum_sorted_and_normalized():
    spec = FrequencySpectrum.of([0.5, 2.0, 1.0])
    assert spec.freqs == (2.0, 1.0, 0.5)
    assert spec.normalized().freqs == (1.0, 0.5, 0.25)
    assert spec.ell == 3 and spec.k == 6


@pytest.mark.parametrize("tag,dims", [("Heisenberg", (2, 3)), ("BiHeisenberg", (4, 5)),
                                      ("Corank2_35", (3, 5))])
def test_growth_vectors(tag, dims):
    assert growth_vector(normal_form_constants(tag, alpha=0.3)).dims == dims


@pytest.mark.parametrize("dims,Q", [((2, 3), 4), ((4, 5), 6), ((2, 3, 5), 10)])
def test_hausdorff_dimension(dims, Q):
    assert hausdorff_dimension(GrowthVector(dims)) == Q


def test_growth_vector_must_increase():
    from srvolume.exceptions import ValidationError

    with pytest.raises(ValidationError):
        GrowthVector((2, 2, 3))


def test_not_bracket_generating():
    c = StructureConstants.from_brackets(4, 2, {(0, 1): {2: 1.0}})
    with pytest.raises(NotBracketGenerating):
        growth_vector(c)


def test_classify_examples():
    assert classify_normal_form(normal_form_constants("Heisenberg")).tag == "Heisenberg"
    assert classify_normal_form(normal_form_constants("GoursatRank2")).tag == "GoursatRank2"
    L = block_diag(rotation_block(2.0), rotation_block(1.0))
    label = classify_normal_form(StructureConstants.from_matrices([L]))
    assert label.tag == "BiHeisenberg"
    assert label.alpha == pytest.approx(0.5)


@pytest.mark.parametrize("tag", list(NORMAL_FORM_GROWTH))
def test_classification_invariant_under_horizontal_rotation(tag):
    c = normal_form_constants(tag, alpha=0.4)
    P = np.eye(c.n)
    P[: c.k, : c.k] = special_ortho_group.rvs(c.k, random_state=3) if c.k > 1 else 1.0
    rotated = c.change_basis(P)
    a, b = classify_normal_form(c), classify_normal_form(rotated)
    assert a.tag == b.tag
    if a.alpha is not None:
        assert abs(a.alpha - b.alpha) < 1e-9


@pytest.mark.parametrize("tag", list(NORMAL_FORM_GROWTH))
def test_Q_at_least_n(tag):
    c = normal_form_constants(tag)
    assert hausdorff_dimension(growth_vector(c)) > c.n


def test_classify_rejects_large_and_inconsistent():
    c = StructureConstants.from_matrices([block_diag(rotation_block(1), rotation_block(1),
                                                     rotation_block(1))])
    with pytest.raises(UnsupportedDimension):
        classify_normal_form(c)
    # [e1,e2]=e3, [e2,e3]=e1, [e3,e1]=e2 violates nothing, but [e1,e2]=e3 with [e1,e3]=e1 does
    bad = StructureConstants.from_brackets(3, 2, {(0, 1): {2: 1.0}, (0, 2): {0: 1.0}})
    with pytest.raises(Inconsistent):
        classify_normal_form(bad)


def test_parse_structure_constants():
    c = parse_structure_constants("n = 5\nk = 4\n[1,2] = Z1\n[3,4] = 0.5 Z1  # second plane\n")
    assert c.n == 5 and c.k == 4
    assert c.c[0, 1, 4] == 1.0 and c.c[1, 0, 4] == -1.0 and c.c[2, 3, 4] == 0.5
    assert classify_normal_form(c).alpha == pytest.approx(0.5)
    round_trip = parse_structure_constants(c.to_text())
    assert np.array_equal(round_trip.c, c.c)


def test_parse_error_has_location():
    with pytest.raises(ParseError) as err:
        parse_structure_constants("n = 3\n[1,2] = Z1 +* Z2\n")
    assert err.value.line == 2
    assert err.value.column is not None


@pytest.mark.parametrize("b1,b2,want", [(1, 0, 1.0), (3, 4, 0.2), (1, 1, 1 / math.sqrt(2))])
def test_popp_coefficient(b1, b2, want):
    assert popp_coefficient_45(b1, b2) == pytest.approx(want, rel=1e-15)


def test_eigenvalue_curvature_zero_direction():
    assert eigenvalue_curvature(np.diag([2.0, 1.0, -1.0]), np.zeros((3, 3)), 1) == 0.0


def test_eigenvalue_curvature_two_by_two():
    A = np.diag([1.0, -1.0])
    B = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert eigenvalue_curvature(A, B, 1) == pytest.approx(1.0, abs=1e-14)
    # sqrt(1 + t^2) by second difference
    h = 1e-4
    fd = (math.sqrt(1 + h * h) - 2 + math.sqrt(1 + h * h)) / h ** 2
    assert fd == pytest.approx(1.0, abs=1e-6)


def _top_eig(M, j):
    return np.linalg.eigvalsh(M)[::-1][j - 1]


@pytest.mark.parametrize("seed", range(5))
def test_eigenvalue_curvature_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    Y = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    A, B = X + X.conj().T, Y + Y.conj().T
    for j in range(1, 5):
        h = 1e-3
        f = [_top_eig(A + s * B, j) for s in (-2 * h, -h, 0.0, h, 2 * h)]
        fd = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
        assert eigenvalue_curvature(A, B, j) == pytest.approx(fd, abs=1e-6, rel=1e-6)


def test_eigenvalue_curvature_errors():
    with pytest.raises(IndexOutOfRange):
        eigenvalue_curvature(np.diag([1.0, 0.0]), np.eye(2), 3)
    with pytest.raises(EigenvalueNotSimple):
        eigenvalue_curvature(np.eye(2), np.eye(2), 1)


def test_skew_matrix_rebuilt_from_upper_triangle():
    m = SkewMatrix(np.array([[0.0, 2.0, 3.0], [9.0, 0.0, 1.0], [9.0, 9.0, 0.0]]))
    assert np.array_equal(m.entries, -m.entries.T)
    assert m.entries[1, 0] == -2.0


def test_skew_matrix_rejects_non_skew():
    from srvolume.exceptions import ValidationError

    with pytest.raises(ValidationError):
        SkewMatrix.from_array([[0.0, 1.0], [1.0, 0.0]])
