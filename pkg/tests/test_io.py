import json

import numpy as np

from moyalkit import io as mio
from moyalkit.phasespace import GridSpec, wigner
from moyalkit.states import cat


def test_field_csv_round_trip(tmp_path):
    g = GridSpec(64, 24.0, 1.0)
    F = wigner(cat(g, 1.0))
    path = tmp_path / "f.csv"
    mio.write_with_sidecar(path, mio.field_csv(F), mio.sidecar(g, state="cat", time=0.0))
    assert np.array_equal(mio.read_field_csv(path, g), F.values)
    meta = json.loads(path.with_suffix(".json").read_text())
    assert meta["grid"] == g.as_dict() and meta["time"] == 0.0


def test_atomic_write_leaves_no_temp_files(tmp_path):
    mio.atomic_write_text(tmp_path / "a" / "b.txt", "hello")
    assert [p.name for p in (tmp_path / "a").iterdir()] == ["b.txt"]


def test_read_table_with_and_without_header(tmp_path):
    (tmp_path / "h.csv").write_text("x,V\n0,1\n1,2\n")
    (tmp_path / "n.csv").write_text("1\n2\n")
    assert list(mio.read_table(tmp_path / "h.csv")) == [1, 2]
    assert list(mio.read_table(tmp_path / "n.csv")) == [1, 2]


def test_json_handles_numpy_and_complex():
    text = mio.to_json({"b": np.float64(1.5), "a": np.arange(2), "c": 1 + 2j})
    assert json.loads(text) == {"a": [0, 1], "b": 1.5, "c": {"im": 2.0, "re": 1.0}}
    assert text.index('"a"') < text.index('"b"')
