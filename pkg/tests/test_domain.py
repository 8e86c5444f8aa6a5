import itertools
import json

import pytest
from hypothesis import given, strategies as st

import catdom as cd
from catdom.domain import CAPACITY_LIMIT

from conftest import SHAPE_2X2, SHAPE_3X2, pref_of


class TestDomainShape:
    def test_bundle_count(self):
        assert SHAPE_3X2.bundle_count == 9
        assert cd.DomainShape(2, 3).bundle_count == 8
        assert cd.DomainShape(1, 1).bundle_count == 1

    def test_bundles_ascending(self):
        assert list(SHAPE_2X2.bundles()) == [(1, 1), (1, 2), (2, 1), (2, 2)]

    def test_agents_and_categories(self):
        assert list(SHAPE_3X2.agents()) == [1, 2, 3]
        assert list(SHAPE_3X2.categories()) == [1, 2]

    @pytest.mark.parametrize("n,p", [(0, 1), (1, 0), (-2, 3)])
    def test_rejects_nonpositive(self, n, p):
        with pytest.raises(cd.ValidationError):
            cd.DomainShape(n, p)

    def test_rejects_huge_bundle_space(self):
        with pytest.raises(cd.CapacityError):
            cd.DomainShape(10, 7)  # 10**7 > CAPACITY_LIMIT
        assert 10 ** 7 > CAPACITY_LIMIT

    def test_validate_bundle(self):
        SHAPE_2X2.validate_bundle((2, 1))
        with pytest.raises(cd.ValidationError):
            SHAPE_2X2.validate_bundle((2, 3))
        with pytest.raises(cd.ValidationError):
            SHAPE_2X2.validate_bundle((1, 1, 1))


class TestEncoding:
    def test_known_codes(self):
        # mixed radix, 0-based: (2, 1) in a 3x2 domain is 1*3 + 0
        assert cd.encode_bundle(SHAPE_3X2, (2, 1)) == 3
        assert cd.decode_bundle(SHAPE_3X2, 3) == (2, 1)
        assert cd.encode_bundle(SHAPE_3X2, (1, 1)) == 0
        assert cd.encode_bundle(SHAPE_3X2, (3, 3)) == 8

    def test_matches_enumeration_order(self):
        for idx, bundle in enumerate(SHAPE_3X2.bundles()):
            assert cd.encode_bundle(SHAPE_3X2, bundle) == idx
            assert cd.decode_bundle(SHAPE_3X2, idx) == bundle

    @given(st.integers(1, 5), st.integers(1, 4), st.data())
    def test_roundtrip(self, n, p, data):
        shape = cd.DomainShape(n, p)
        code = data.draw(st.integers(0, shape.bundle_count - 1))
        assert cd.encode_bundle(shape, cd.decode_bundle(shape, code)) == code

    def test_decode_out_of_range(self):
        with pytest.raises(cd.ValidationError):
            cd.decode_bundle(SHAPE_2X2, 4)
        with pytest.raises(cd.ValidationError):
            cd.decode_bundle(SHAPE_2X2, -1)


class TestPreference:
    def test_rank_of_and_bundle_at(self):
        pref = pref_of(SHAPE_2X2, ["21", "11", "22", "12"])
        assert pref.rank_of((2, 1)) == 1
        assert pref.rank_of((1, 2)) == 4
        assert pref.top() == (2, 1)
        for rank in range(1, 5):
            assert pref.rank_of(pref.bundle_at(rank)) == rank

    def test_rejects_duplicates(self):
        with pytest.raises(cd.ValidationError):
            pref_of(SHAPE_2X2, ["21", "11", "21", "12"])

    def test_rejects_wrong_length(self):
        with pytest.raises(cd.ValidationError):
            pref_of(SHAPE_2X2, ["21", "11", "22"])

    def test_rejects_foreign_bundle(self):
        with pytest.raises(cd.ValidationError):
            cd.Preference(SHAPE_2X2, [(1, 1), (1, 2), (2, 1), (2, 3)])

    def test_equality_and_hash(self):
        a = pref_of(SHAPE_2X2, ["21", "11", "22", "12"])
        b = pref_of(SHAPE_2X2, ["21", "11", "22", "12"])
        c = pref_of(SHAPE_2X2, ["11", "21", "22", "12"])
        assert a == b and hash(a) == hash(b)
        assert a != c


class TestAllocation:
    def test_valid(self):
        alloc = cd.Allocation({1: (1, 2), 2: (2, 1)})
        check = cd.validate_allocation(SHAPE_2X2, alloc)
        assert check.ok

    def test_detects_duplicate_item(self):
        alloc = cd.Allocation({1: (1, 2), 2: (1, 1)})
        check = cd.validate_allocation(SHAPE_2X2, alloc)
        assert not check.ok
        assert check.category == 1
        assert check.item == 1

    def test_detects_wrong_agents(self):
        alloc = cd.Allocation({1: (1, 2), 3: (2, 1)})
        assert not cd.validate_allocation(SHAPE_2X2, alloc).ok

    def test_welfare_ranks(self, profile_3x2):
        alloc = cd.Allocation({1: (1, 2), 2: (2, 1), 3: (3, 3)})
        assert cd.utilitarian_rank(profile_3x2, alloc) == 11
        assert cd.egalitarian_rank(profile_3x2, alloc) == 7

    def test_welfare_rejects_bad_allocation(self, profile_3x2):
        alloc = cd.Allocation({1: (1, 2), 2: (1, 2), 3: (3, 3)})
        with pytest.raises(cd.ValidationError):
            cd.utilitarian_rank(profile_3x2, alloc)

    def test_every_exhaustive_allocation_is_valid(self):
        # every pair of per-category permutations induces a valid allocation
        items = [1, 2]
        count = 0
        for perm1 in itertools.permutations(items):
            for perm2 in itertools.permutations(items):
                alloc = cd.Allocation(
                    {j: (perm1[j - 1], perm2[j - 1]) for j in (1, 2)}
                )
                assert cd.validate_allocation(SHAPE_2X2, alloc).ok
                count += 1
        assert count == 4


class TestJson:
    def test_profile_roundtrip(self, profile_3x2):
        doc = cd.profile_to_json(profile_3x2)
        text = json.dumps(doc)
        back = cd.profile_from_json(json.loads(text))
        assert back.shape == profile_3x2.shape
        for j in (1, 2, 3):
            assert back.pref(j) == profile_3x2.pref(j)

    def test_profile_error_names_agent(self):
        doc = {
            "n": 2,
            "p": 1,
            "preferences": [[[1], [2]], [[1], [1]]],
        }
        with pytest.raises(cd.ValidationError, match="agent 2"):
            cd.profile_from_json(doc)

    def test_allocation_roundtrip(self):
        alloc = cd.Allocation({1: (1, 2), 2: (2, 1)})
        back = cd.allocation_from_json(SHAPE_2X2, cd.allocation_to_json(alloc))
        assert dict(back.bundles) == dict(alloc.bundles)
