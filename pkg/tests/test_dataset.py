import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from recome.dataset import (
    NOISE_LABEL,
    BlobSpec,
    Dataset,
    DatasetError,
    generate_blobs,
    load_dataset,
    load_iris,
    minmax_normalize,
    save_dataset,
)


def test_load_plain_column(tmp_path):
    p = tmp_path / "three.csv"
    p.write_text("0\n1\n3\n")
    ds = load_dataset(p)
    assert ds.points.tolist() == [[0.0], [1.0], [3.0]]
    assert ds.labels is None


def test_load_whitespace_with_label_index(tmp_path):
    p = tmp_path / "ws.txt"
    p.write_text("1.5 2 a\n3 4 b\n\n5 6 a\n")
    ds = load_dataset(p, label_column=-1)
    assert ds.points.shape == (3, 2)
    assert ds.labels == ("a", "b", "a")


def test_iris_shape():
    ds = load_iris()
    assert (ds.n, ds.m) == (150, 4)
    values, counts = np.unique(ds.labels, return_counts=True)
    assert len(values) == 3
    assert counts.tolist() == [50, 50, 50]
    assert "species" not in ds.names


def test_non_numeric_cell_reports_position(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("1,2\n3,abc\n")
    with pytest.raises(DatasetError) as err:
        load_dataset(p)
    assert err.value.row == 2 and err.value.column == 2
    assert "row 2" in str(err.value) and "column 2" in str(err.value)


def test_ragged_rows(tmp_path):
    p = tmp_path / "ragged.csv"
    p.write_text("1,2\n3\n")
    with pytest.raises(DatasetError, match="row 2"):
        load_dataset(p)


def test_too_few_rows(tmp_path):
    p = tmp_path / "one.csv"
    p.write_text("1,2\n")
    with pytest.raises(DatasetError, match="at least 2"):
        load_dataset(p)


def test_missing_label_column(tmp_path):
    p = tmp_path / "h.csv"
    p.write_text("a,b\n1,2\n3,4\n")
    with pytest.raises(DatasetError, match="not in header"):
        load_dataset(p, label_column="species")


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_dataset(tmp_path / "nope.csv")


def test_non_finite_rejected():
    with pytest.raises(DatasetError):
        Dataset([[0.0], [float("nan")]])


def _spec(seed=7):
    return BlobSpec(
        clusters=(((0.0, 0.0), 1.0, 100), ((5.0, 5.0), 0.5, 20)),
        noise_count=5,
        noise_box=((-10.0, -10.0), (10.0, 10.0)),
        seed=seed,
    )


def test_blob_counts():
    ds = generate_blobs(_spec())
    assert ds.n == 125
    values, counts = np.unique(ds.labels, return_counts=True)
    assert dict(zip(values, counts)) == {"0": 100, "1": 20, NOISE_LABEL: 5}


def test_blob_determinism():
    a = generate_blobs(_spec())
    b = generate_blobs(_spec())
    assert a.points.tobytes() == b.points.tobytes()
    assert a.labels == b.labels
    assert generate_blobs(_spec(8)).points.tobytes() != a.points.tobytes()


def _mean_pairwise(x):
    total = 0.0
    pairs = list(itertools.combinations(range(len(x)), 2))
    for i, j in pairs:
        total += float(np.linalg.norm(x[i] - x[j]))
    return total / len(pairs)


def test_blob_spread_follows_stddev():
    spec = BlobSpec(clusters=(((0.0, 0.0), 0.1, 40), ((0.0, 0.0), 2.0, 40)), seed=3)
    ds = generate_blobs(spec)
    lab = np.array(ds.labels)
    assert _mean_pairwise(ds.points[lab == "1"]) > _mean_pairwise(ds.points[lab == "0"])


def test_blob_spec_json_roundtrip():
    spec = _spec()
    again = BlobSpec.from_json(spec.to_json())
    assert again == spec


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(clusters=(((0.0,), 1.0, 1),)),
        dict(clusters=(((0.0,), -1.0, 5),)),
        dict(clusters=(((0.0,), 1.0, 5),), noise_count=2),
        dict(clusters=(((0.0,), 1.0, 5),), noise_count=2, noise_box=((1.0,), (1.0,))),
    ],
)
def test_blob_spec_validation(kwargs):
    with pytest.raises(ValueError):
        BlobSpec(**kwargs)


def test_minmax_examples():
    ds = Dataset([[0.0, 4.0], [5.0, 4.0], [10.0, 4.0]])
    out = minmax_normalize(ds)
    assert out.points[:, 0].tolist() == [0.0, 0.5, 1.0]
    assert out.points[:, 1].tolist() == [0.0, 0.0, 0.0]
    assert minmax_normalize(out).points.tolist() == out.points.tolist()


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 20), st.integers(1, 4)),
              elements=st.floats(-1e6, 1e6, allow_nan=False)))
def test_minmax_properties(x):
    out = minmax_normalize(Dataset(x)).points
    assert np.all((out >= 0) & (out <= 1))
    for j in range(x.shape[1]):
        a, b = x[:, j], out[:, j]
        for p, q in itertools.combinations(range(len(a)), 2):
            if a[p] < a[q]:
                assert b[p] <= b[q]


def test_save_load_roundtrip(tmp_path):
    ds = generate_blobs(_spec())
    path = tmp_path / "blobs.csv"
    save_dataset(ds, path)
    again = load_dataset(path, label_column="label")
    np.testing.assert_array_equal(again.points, ds.points)
    assert again.labels == ds.labels
