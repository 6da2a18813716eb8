"""DT3 v1 tensor files."""

import json
import struct

import numpy as np
import pytest

from app.errors import FormatError
from app.services.rng import generator, standard_normal
from app.services.tensor import load_matrix, load_tensor, save_matrix, save_tensor
from app.services.tensor.storage import HEADER, MAGIC, sidecar_path


@pytest.fixture
def tensor():
    return standard_normal(generator(3, "storage"), (3, 4, 5))


class TestRoundTrip:
    def test_tensor_without_sidecar(self, tmp_path, tensor):
        path = save_tensor(tmp_path / "x.dt3", tensor)
        X, meta = load_tensor(path)
        np.testing.assert_array_equal(X, tensor)
        assert meta is None
        assert not sidecar_path(path).exists()

    def test_sidecar(self, tmp_path, tensor):
        path = save_tensor(tmp_path / "x.dt3", tensor, seed=17, description="noisy")
        _, meta = load_tensor(path)
        assert meta == {"dims": [3, 4, 5], "seed": 17, "description": "noisy"}
        assert json.loads(sidecar_path(path).read_text())["seed"] == 17

    def test_matrix(self, tmp_path):
        M = np.arange(6.0).reshape(2, 3)
        path = save_matrix(tmp_path / "m.dt3", M)
        loaded, _ = load_matrix(path)
        np.testing.assert_array_equal(loaded, M)

    def test_layout(self, tmp_path, tensor):
        path = save_tensor(tmp_path / "x.dt3", tensor)
        data = path.read_bytes()
        assert data[:12] == MAGIC
        assert struct.unpack_from("<I3Q", data, 12) == (1, 3, 4, 5)
        assert len(data) == HEADER.size + 8 * tensor.size
        assert np.frombuffer(data, "<f8", offset=HEADER.size)[1] == tensor[0, 0, 1]


class TestMalformed:
    def _write(self, tmp_path, data: bytes):
        path = tmp_path / "bad.dt3"
        path.write_bytes(data)
        return path

    def test_three_byte_file(self, tmp_path):
        with pytest.raises(FormatError) as info:
            load_tensor(self._write(tmp_path, b"DT3"))
        assert info.value.offset == 3
        assert "offset 3" in str(info.value)

    def test_bad_magic(self, tmp_path):
        data = HEADER.pack(b"DT3-TENSOX\0\0", 1, 1, 1, 1) + b"\0" * 8
        with pytest.raises(FormatError) as info:
            load_tensor(self._write(tmp_path, data))
        assert info.value.offset == 9

    def test_bad_version(self, tmp_path):
        data = HEADER.pack(MAGIC, 2, 1, 1, 1) + b"\0" * 8
        with pytest.raises(FormatError) as info:
            load_tensor(self._write(tmp_path, data))
        assert info.value.offset == 12

    def test_zero_dimension(self, tmp_path):
        data = HEADER.pack(MAGIC, 1, 2, 0, 1)
        with pytest.raises(FormatError) as info:
            load_tensor(self._write(tmp_path, data))
        assert info.value.offset == 24

    def test_truncated_payload(self, tmp_path):
        data = HEADER.pack(MAGIC, 1, 2, 2, 2) + b"\0" * 20
        with pytest.raises(FormatError) as info:
            load_tensor(self._write(tmp_path, data))
        assert info.value.offset == len(data)

    def test_trailing_bytes(self, tmp_path):
        data = HEADER.pack(MAGIC, 1, 1, 1, 1) + b"\0" * 12
        with pytest.raises(FormatError) as info:
            load_tensor(self._write(tmp_path, data))
        assert info.value.offset == HEADER.size + 8

    def test_non_finite_entry(self, tmp_path):
        values = np.array([1.0, np.nan], dtype="<f8").tobytes()
        data = HEADER.pack(MAGIC, 1, 1, 1, 2) + values
        with pytest.raises(FormatError) as info:
            load_tensor(self._write(tmp_path, data))
        assert info.value.offset == HEADER.size + 8

    def test_matrix_loader_rejects_tensor(self, tmp_path, tensor):
        path = save_tensor(tmp_path / "x.dt3", tensor)
        with pytest.raises(FormatError) as info:
            load_matrix(path)
        assert info.value.offset == 32

    @pytest.mark.parametrize("text", ["{not json", "[1, 2]", "\xff"])
    def test_malformed_sidecar(self, tmp_path, tensor, text):
        path = save_tensor(tmp_path / "x.dt3", tensor)
        sidecar_path(path).write_bytes(text.encode("latin-1"))
        with pytest.raises(FormatError) as info:
            load_tensor(path)
        assert info.value.offset == 0
        assert "x.dt3.json" in str(info.value)
