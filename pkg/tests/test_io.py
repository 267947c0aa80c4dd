import struct

import numpy as np
import pytest

from vibrodiag import io
from vibrodiag.dsp import SignalRecord
from vibrodiag.errors import MissingArtifact, ShapeMismatch, UsageError


def make_record(n=1000, channels=("hor", "ver"), rate=100_000, seed=0):
    rng = np.random.default_rng(seed)
    return SignalRecord(
        record_id="rec-000",
        sample_rate=rate,
        channels=list(channels),
        samples=rng.normal(size=(n, len(channels))),
        condition="nSnD",
    )


class TestTensor:
    def test_roundtrip_float32_exact(self, tmp_path):
        data = np.random.default_rng(0).normal(size=(128, 100, 4)).astype(np.float32)
        p = tmp_path / "t.cbs"
        io.save_tensor(p, data.astype(np.float64))
        out = io.load_tensor(p)
        np.testing.assert_array_equal(out, data.astype(np.float64))

    def test_header_layout(self, tmp_path):
        data = np.arange(2 * 3 * 4, dtype=np.float64).reshape(2, 3, 4)
        p = tmp_path / "t.cbs"
        io.save_tensor(p, data)
        raw = p.read_bytes()
        assert raw[:4] == b"CBS1"
        assert struct.unpack("<III", raw[4:16]) == (2, 3, 4)
        # Payload is channel-major: first plane equals data[:, :, 0].
        first = np.frombuffer(raw[16:], dtype="<f4")[:6].reshape(2, 3)
        np.testing.assert_array_equal(first, data[:, :, 0].astype(np.float32))

    def test_rejects_non_3d(self, tmp_path):
        with pytest.raises(ShapeMismatch):
            io.save_tensor(tmp_path / "t.cbs", np.zeros((4, 4)))

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingArtifact):
            io.load_tensor(tmp_path / "absent.cbs")

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "bad.cbs"
        p.write_bytes(b"XXXX" + b"\x00" * 12)
        with pytest.raises(UsageError):
            io.load_tensor(p)

    def test_truncated_payload(self, tmp_path):
        p = tmp_path / "short.cbs"
        p.write_bytes(b"CBS1" + struct.pack("<III", 4, 4, 1) + b"\x00" * 8)
        with pytest.raises(UsageError):
            io.load_tensor(p)


class TestPgm:
    def test_header_and_scaling(self, tmp_path):
        plane = np.array([[0.0, 0.5], [1.0, 0.25]])
        p = tmp_path / "m.pgm"
        io.save_pgm(p, plane)
        raw = p.read_bytes()
        header = b"P5\n2 2\n255\n"
        assert raw.startswith(header)
        pixels = np.frombuffer(raw[len(header):], dtype=np.uint8).reshape(2, 2)
        np.testing.assert_array_equal(pixels, [[0, 128], [255, 64]])

    def test_constant_plane_all_zero(self, tmp_path):
        p = tmp_path / "c.pgm"
        io.save_pgm(p, np.full((3, 3), 7.0))
        pixels = p.read_bytes().split(b"\n255\n", 1)[1]
        assert set(pixels) == {0}

    def test_rejects_non_2d(self, tmp_path):
        with pytest.raises(ShapeMismatch):
            io.save_pgm(tmp_path / "x.pgm", np.zeros((2, 2, 2)))


class TestRecords:
    def test_wav_roundtrip_float32(self, tmp_path):
        rec = make_record()
        p = tmp_path / "r.wav"
        io.save_record_wav(p, rec)
        back = io.load_record_wav(p, rec.record_id, rec.channels, rec.condition)
        assert back.sample_rate == rec.sample_rate
        assert back.channels == rec.channels
        np.testing.assert_allclose(back.samples, rec.samples, atol=1e-6)

    def test_wav_default_channel_names(self, tmp_path):
        rec = make_record()
        p = tmp_path / "r.wav"
        io.save_record_wav(p, rec)
        back = io.load_record_wav(p, "r", [])
        assert back.channels == ["ch0", "ch1"]

    def test_csv_roundtrip(self, tmp_path):
        rec = make_record(n=50)
        p = tmp_path / "r.csv"
        io.save_record_csv(p, rec)
        back = io.load_record_csv(p, rec.record_id, rec.sample_rate)
        assert back.channels == rec.channels
        np.testing.assert_allclose(back.samples, rec.samples)

    def test_missing_record_files(self, tmp_path):
        with pytest.raises(MissingArtifact):
            io.load_record_wav(tmp_path / "no.wav", "r", [])
        with pytest.raises(MissingArtifact):
            io.load_record_csv(tmp_path / "no.csv", "r", 1000)


class TestManifest:
    def test_roundtrip_and_dispatch(self, tmp_path):
        rec = make_record()
        wav = tmp_path / "r.wav"
        io.save_record_wav(wav, rec)
        entries = [
            {
                "record_id": rec.record_id,
                "path": str(wav),
                "sample_rate": rec.sample_rate,
                "condition": rec.condition,
                "split": "train",
                "channels": rec.channels,
            }
        ]
        mpath = tmp_path / "manifest.json"
        io.save_manifest(mpath, entries)
        loaded = io.load_manifest(mpath)
        assert loaded == entries
        back = io.load_record(loaded[0])
        assert back.record_id == rec.record_id
        assert back.condition == "nSnD"

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(MissingArtifact):
            io.load_manifest(tmp_path / "absent.json")

    def test_unsupported_extension(self):
        with pytest.raises(UsageError):
            io.load_record({"record_id": "r", "path": "r.flac"})


class TestCsvWriter:
    def test_write_csv(self, tmp_path):
        p = tmp_path / "out.csv"
        io.write_csv(p, ["a", "b"], [[1, 2], [3, 4]])
        assert p.read_text().splitlines() == ["a,b", "1,2", "3,4"]
