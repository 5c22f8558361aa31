import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from solerlab.reports import (CACHE_ENV, Report, ResultCache, canonical_key,
                              default_cache_dir, read_csv, to_jsonable, write_csv)

finite = st.floats(allow_nan=False, allow_infinity=False)
leaf = st.one_of(st.integers(-10**6, 10**6), finite, st.text(max_size=8), st.booleans(),
                 st.none(), st.builds(complex, finite, finite))
payload = st.recursive(leaf, lambda inner: st.one_of(
    st.lists(inner, max_size=4), st.dictionaries(st.text(max_size=6), inner, max_size=4)),
    max_leaves=20)


@given(st.dictionaries(st.text(max_size=6), payload, max_size=5))
def test_report_round_trip(results):
    rep = Report("soliton", {"k": 1.0}, results, {"total": 0.5}, {"note": "x"})
    back = Report.from_json(rep.to_json())
    assert back == rep
    assert back.deterministic_json() == rep.deterministic_json()


def test_numpy_and_complex_values_become_native():
    out = to_jsonable({"a": np.float64(1.5), "b": np.arange(3), "c": 1 + 2j,
                       "d": (np.int32(4),)})
    assert out == {"a": 1.5, "b": [0, 1, 2], "c": {"re": 1.0, "im": 2.0}, "d": [4]}
    json.dumps(out)


def test_reports_need_a_schema_version():
    data = Report("x", {}, {}).to_dict()
    data.pop("schema_version")
    with pytest.raises(ValueError):
        Report.from_dict(data)


def test_deterministic_json_ignores_timings():
    a = Report("x", {"k": 1}, {"v": 2}, {"total": 1.0})
    b = Report("x", {"k": 1}, {"v": 2}, {"total": 9.0})
    assert a.deterministic_json() == b.deterministic_json()
    assert a.to_json() != b.to_json()


def test_csv_round_trip(tmp_path):
    path = tmp_path / "curve.csv"
    write_csv(path, {"r": [0.0, 0.1], "u_k": [1.0, 0.99]})
    back = read_csv(path)
    assert list(back) == ["r", "u_k"]
    assert [float(v) for v in back["u_k"]] == [1.0, 0.99]


def test_csv_rejects_ragged_columns(tmp_path):
    with pytest.raises(ValueError):
        write_csv(tmp_path / "x.csv", {"a": [1, 2], "b": [1]})


@given(st.dictionaries(st.text(max_size=5), st.one_of(finite, st.integers()), max_size=5))
def test_cache_key_ignores_insertion_order(fields):
    reordered = dict(reversed(list(fields.items())))
    assert canonical_key(fields) == canonical_key(reordered)


def test_cache_key_separates_nearby_floats():
    assert canonical_key({"omega": 0.99}) != canonical_key({"omega": 0.99 + 1e-15})


def test_cache_key_rejects_non_finite():
    with pytest.raises(ValueError):
        canonical_key({"k": math.nan})


def test_cache_directory_override(monkeypatch, tmp_path):
    monkeypatch.setenv(CACHE_ENV, str(tmp_path / "c"))
    assert default_cache_dir() == tmp_path / "c"
    assert ResultCache().directory == tmp_path / "c"


def test_cache_store_and_lookup(tmp_path):
    cache = ResultCache(tmp_path)
    rep = Report("x", {"k": 1}, {"v": [1, 2]})
    key = canonical_key({"k": 1})
    assert cache.lookup(key) is None
    path = cache.store(key, rep)
    assert path.parent.name == key[:2]
    assert cache.lookup(key) == rep
    assert not list(tmp_path.rglob("*.tmp"))


def test_corrupt_entry_warns_and_is_discarded(tmp_path):
    cache = ResultCache(tmp_path)
    key = canonical_key({"k": 2})
    path = cache.store(key, Report("x", {}, {}))
    path.write_text("{not json")
    with pytest.warns(RuntimeWarning):
        assert cache.lookup(key) is None
    assert not path.exists()
