import numpy as np
import pytest

from indsub import io as fio
from indsub.baselines import fit_pca
from indsub.dataset import LabeledDataset
from indsub.ispp import FitConfig, fit_algorithm1, oracle_projection
from indsub.subspace import synth_union


@pytest.fixture
def small():
    return synth_union(12, (2, 3, 2), 6, 0.0, seed=3)


def test_dataset_round_trip(tmp_path, small):
    data, _ = small
    p = tmp_path / "d.bin"
    fio.write_dataset(p, data)
    back = fio.read_dataset(p)
    np.testing.assert_array_equal(back.features, data.features)
    np.testing.assert_array_equal(back.labels, data.labels)
    fio.write_dataset(tmp_path / "again.bin", back)
    assert (tmp_path / "again.bin").read_bytes() == p.read_bytes()


def test_dataset_header_layout(small):
    data, _ = small
    buf = fio.dataset_to_bytes(data)
    assert buf[:4] == b"ISDS"
    assert len(buf) == fio._DS.size + 4 * data.n_samples + 8 * data.features.size
    # column-major payload: first n floats are sample 1
    first = np.frombuffer(buf, "<f8", count=12, offset=fio._DS.size + 4 * data.n_samples)
    np.testing.assert_array_equal(first, data.features[:, 0])


@pytest.mark.parametrize("mutate", ["magic", "truncate", "trailing"])
def test_dataset_corrupt(small, mutate):
    buf = bytearray(fio.dataset_to_bytes(small[0]))
    if mutate == "magic":
        buf[:4] = b"XXXX"
    elif mutate == "truncate":
        buf = buf[:-3]
    else:
        buf += b"\0"
    with pytest.raises(fio.FormatError):
        fio.dataset_from_bytes(bytes(buf))


def test_bases_round_trip(tmp_path, small):
    _, subs = small
    fio.write_bases(tmp_path / "b.bin", subs)
    back = fio.read_bases(tmp_path / "b.bin")
    assert [s.dim for s in back] == [2, 3, 2]
    for a, b in zip(subs, back):
        np.testing.assert_array_equal(a.basis, b.basis)


@pytest.mark.parametrize("kind", ["oracle", "algorithm1", "pca"])
def test_model_round_trip(tmp_path, small, kind):
    data, subs = small
    if kind == "oracle":
        model = oracle_projection(subs)
    elif kind == "algorithm1":
        model = fit_algorithm1(data, FitConfig(seed=2))
    else:
        model = fit_pca(data.features, 3)
    p = tmp_path / "m.bin"
    fio.write_model(p, model)
    back = fio.read_model(p)
    np.testing.assert_array_equal(back.matrix, model.matrix)
    assert back.method == model.method and back.per_class_cosine == model.per_class_cosine
    if model.mean is not None:
        np.testing.assert_array_equal(back.mean, model.mean)
    fio.write_model(tmp_path / "m2.bin", back)
    assert (tmp_path / "m2.bin").read_bytes() == p.read_bytes()
    assert f"method={model.method}" in fio.model_summary(back)


def test_model_rejects_non_orthonormal(tmp_path, small):
    model = oracle_projection(small[1])
    p = tmp_path / "m.bin"
    fio.write_model(p, model)
    buf = bytearray(p.read_bytes())
    start = fio._PM.size + fio._PM.unpack_from(buf)[2]  # first matrix entry
    buf[start : start + 8] = np.float64(5.0).tobytes()
    p.write_bytes(bytes(buf))
    with pytest.raises(ValueError):
        fio.read_model(p)


def test_csv_import(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("label,a,b\n1,3,4\n2,0,2\n1,1,0\n")
    data = fio.read_dataset_csv(p)
    np.testing.assert_array_equal(data.labels, [1, 2, 1])
    np.testing.assert_allclose(data.features[:, 0], [0.6, 0.8])
    raw = fio.read_dataset_csv(p, normalize=False)
    np.testing.assert_array_equal(raw.features[:, 0], [3.0, 4.0])


@pytest.mark.parametrize(
    "text",
    ["1,2,3\n2,1\n", "1,2\n2,x\n", "1.5,2\n2,3\n", "label,a\n", "1\n2\n", "1,2\n3,1\n"],
)
def test_csv_import_errors(tmp_path, text):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(ValueError):
        fio.read_dataset_csv(p)


def test_csv_export_import_lossless(tmp_path, small):
    data, _ = small
    fio.write_dataset_csv(tmp_path / "d.csv", data)
    back = fio.read_dataset_csv(tmp_path / "d.csv", normalize=False)
    np.testing.assert_array_equal(back.features, data.features)
    assert (tmp_path / "d.csv").read_text().startswith("label,f1,")


def test_atomic_write_leaves_no_temp(tmp_path):
    fio.atomic_write(tmp_path / "sub" / "f.txt", b"abc")
    assert [p.name for p in (tmp_path / "sub").iterdir()] == ["f.txt"]
