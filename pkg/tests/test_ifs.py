from __future__ import annotations

from itertools import product as iproduct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import PINNED, brute_force_word_matrix
from mandelperc.errors import ValidationError
from mandelperc.examples import example_family, example_spec
from mandelperc.ifs import (
    basic_cells,
    coding_matrices,
    family_from_matrices,
    goodness_check,
    iter_word_products,
    validate_ifs,
    word_product,
)


def err_code(excinfo) -> str:
    return excinfo.value.code


class TestValidation:
    def test_carpet_valid(self):
        spec = validate_ifs(1, 3, (0, 1, 1, 2, 2, 3, 3, 4))
        assert spec.M == 8 and spec.L == 3 and spec.d == 1

    def test_divisibility_rejection(self):
        with pytest.raises(ValidationError) as e:
            validate_ifs(1, 3, (0, 1))
        assert err_code(e) == "divisibility"

    def test_l_minus_one_equal_one_accepts_any_last(self):
        spec = validate_ifs(1, 2, (0, 1, 3))
        assert spec.M == 3

    def test_negative_translation(self):
        with pytest.raises(ValidationError) as e:
            validate_ifs(1, 2, (0, -1, 1))
        assert err_code(e) == "negative-translation"

    def test_too_few_maps(self):
        with pytest.raises(ValidationError) as e:
            validate_ifs(1, 2, (0,))
        assert err_code(e) == "too-few-maps"

    def test_base_too_small(self):
        with pytest.raises(ValidationError) as e:
            validate_ifs(1, 1, (0, 1))
        assert err_code(e) == "base-too-small"

    def test_first_translation_must_be_zero(self):
        with pytest.raises(ValidationError) as e:
            validate_ifs(1, 2, (1, 2, 3))
        assert err_code(e) == "first-translation"

    def test_one_d_translations_sorted(self):
        spec = validate_ifs(1, 2, (2, 0, 1))
        assert spec.translations == ((0,), (1,), (2,))

    def test_two_d_valid(self):
        spec = example_spec("overlap2d")
        assert spec.M == 9 and spec.h == 2

    def test_two_d_keeps_order(self):
        spec = validate_ifs(2, 2, ((2, 2), (0, 0), (1, 2)))
        assert spec.translations[0] == (2, 2)

    def test_two_d_coordinate_range(self):
        with pytest.raises(ValidationError) as e:
            validate_ifs(2, 2, ((0, 0), (2, 1)))
        assert err_code(e) == "coordinate-range"

    def test_two_d_divisibility(self):
        with pytest.raises(ValidationError) as e:
            validate_ifs(2, 3, ((0, 0), (1, 1)))
        assert err_code(e) == "divisibility"

    def test_vector_length_mismatch(self):
        with pytest.raises(ValidationError) as e:
            validate_ifs(2, 2, ((0, 0), (2, 2, 2)))
        assert err_code(e) == "dimension"


class TestBasicCells:
    @pytest.mark.parametrize(
        "name,cells",
        [
            ("carpet", ((0,), (1,))),
            ("gasket", ((0,), (1,))),
            ("line4", ((0,), (1,), (2,), (3,))),
            ("interval2", ((0,),)),
            ("overlap2d", ((0, 0), (0, 1), (1, 0), (1, 1))),
        ],
    )
    def test_fixture_cells(self, name, cells):
        basics = basic_cells(example_spec(name))
        assert basics.cells == cells

    def test_zero_cell_always_present(self):
        basics = basic_cells(example_spec("line4"))
        assert (0,) * 1 in basics.cells


class TestCodingMatrices:
    @pytest.mark.parametrize("name", sorted(PINNED))
    def test_pinned_fixture_matrices(self, name):
        fam = example_family(name)
        assert len(fam.matrices) == len(PINNED[name])
        for got, want in zip(fam.matrices, PINNED[name]):
            assert got.tolist() == want

    def test_interval2_matrices(self):
        fam = example_family("interval2")
        assert [m.tolist() for m in fam.matrices] == [[[1]], [[1]]]

    def test_determinism(self):
        a = example_family("overlap2d")
        b = example_family("overlap2d")
        for x, y in zip(a.matrices, b.matrices):
            assert np.array_equal(x, y)


class TestWordProduct:
    def test_empty_word_is_identity(self):
        fam = example_family("gasket")
        assert word_product(fam, ()).tolist() == [[1, 0], [0, 1]]

    def test_gasket_two_digit_product(self):
        fam = example_family("gasket")
        assert word_product(fam, (0, 1)).tolist() == [[1, 1], [1, 2]]

    def test_digit_out_of_range(self):
        fam = example_family("gasket")
        with pytest.raises(ValidationError) as e:
            word_product(fam, (0, 2))
        assert err_code(e) == "digit-range"

    @pytest.mark.parametrize("name", ["carpet", "gasket", "line4"])
    def test_oracle_equivalence_short_words(self, name):
        spec = example_spec(name)
        fam = example_family(name)
        for n in range(3):
            for word in iproduct(range(fam.n_digits), repeat=n):
                oracle = brute_force_word_matrix(spec, fam.basics, word)
                assert word_product(fam, word).tolist() == oracle.tolist()

    def test_iter_word_products_matches_word_product(self):
        fam = example_family("overlap2d")
        seen = []
        for word, prod in iter_word_products(fam, 2):
            seen.append(word)
            assert np.array_equal(prod, word_product(fam, word))
        assert seen == sorted(seen) and len(seen) == 16


class TestGoodness:
    def test_gasket(self):
        cert = goodness_check(example_family("gasket"), max_len=4)
        assert cert.allowable == (True, True)
        assert cert.positive_word == (0, 1)
        assert cert.good

    def test_carpet_single_digit_witness(self):
        cert = goodness_check(example_family("carpet"), max_len=3)
        assert cert.positive_word == (1,)

    def test_doubling(self):
        cert = goodness_check(example_family("doubling"), max_len=1)
        assert cert.allowable == (True,) and cert.positive_word == (0,)

    def test_positive_word_replay(self):
        for name in ("gasket", "carpet", "line4", "overlap2d"):
            fam = example_family(name)
            cert = goodness_check(fam, max_len=6)
            assert cert.positive_word is not None
            assert np.all(word_product(fam, cert.positive_word) >= 1)

    def test_identity_pair_never_positive(self):
        fam = family_from_matrices([np.eye(2, dtype=int), np.eye(2, dtype=int)])
        cert = goodness_check(fam, max_len=5)
        assert cert.positive_word is None and not cert.good

    def test_non_allowable_reported(self):
        fam = family_from_matrices([[[0, 1], [0, 1]]])
        cert = goodness_check(fam, max_len=2)
        assert cert.allowable == (False,)


@st.composite
def specs_1d(armed):
    L = armed(st.integers(2, 5))
    body = armed(st.lists(st.integers(0, 10), min_size=1, max_size=5))
    last = armed(st.integers(1, 4)) * (L - 1)
    ts = [0] + [min(x, last) for x in body] + [last]
    return validate_ifs(1, L, ts)


@st.composite
def specs_2d(armed):
    L = armed(st.integers(2, 3))
    h = armed(st.integers(1, 2)) * (L - 1)
    extra = armed(
        st.lists(st.tuples(st.integers(0, h), st.integers(0, h)), max_size=4)
    )
    return validate_ifs(2, L, [(0, 0), (h, h)] + extra)


any_spec = st.one_of(specs_1d(), specs_2d())


class TestProperties:
    @settings(max_examples=40, deadline=None)
    @given(any_spec)
    def test_column_mass(self, spec):
        fam = coding_matrices(spec)
        total = sum(m.sum(axis=0) for m in fam.matrices)
        assert np.all(total == spec.M)

    @settings(max_examples=40, deadline=None)
    @given(any_spec)
    def test_closure_fixed_point(self, spec):
        from mandelperc.ifs import cell_step

        basics = basic_cells(spec)
        cell_set = set(basics.cells)
        for b in basics.cells:
            for k in range(spec.M):
                nxt, _ = cell_step(spec, b, k)
                assert nxt in cell_set

    @settings(max_examples=40, deadline=None)
    @given(any_spec)
    def test_cells_inside_box(self, spec):
        basics = basic_cells(spec)
        bound = spec.h // (spec.L - 1) - 1
        for b in basics.cells:
            assert all(0 <= x <= bound for x in b)

    @settings(max_examples=15, deadline=None)
    @given(specs_1d(), st.data())
    def test_oracle_equivalence_random(self, spec, data):
        fam = coding_matrices(spec)
        n = data.draw(st.integers(0, 2))
        word = tuple(
            data.draw(st.integers(0, fam.n_digits - 1)) for _ in range(n)
        )
        oracle = brute_force_word_matrix(spec, fam.basics, word)
        assert word_product(fam, word).tolist() == oracle.tolist()
