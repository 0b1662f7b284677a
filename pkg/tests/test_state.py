"""
Free Gibbs Transport - Run and Ensemble Store Tests
"""
import json

import numpy.testing as npt
import pytest

from core.config import ChainConfig
from core.errors import ArtifactError
from matrep import Ensemble
from state import RunRecord, RunStore, load_ensemble, save_ensemble
from state.ensemble_store import HEADER, MAGIC, sidecar_path
from state.run_store import MANIFEST


@pytest.fixture
def ensemble(gue_samples):
    return Ensemble(gue_samples(3, 4), {"source": "gue"})


class TestEnsembleStore:
    """Tests for HMT1 files."""

    def test_save_and_load(self, ensemble, tmp_path):
        """Test samples and metadata survive a write/read."""
        path = save_ensemble(ensemble, tmp_path / "ens.hmt1", {"seed": 9})
        loaded = load_ensemble(path)
        npt.assert_array_equal(loaded.samples, ensemble.samples)
        assert loaded.meta["source"] == "gue"
        assert loaded.meta["seed"] == 9
        assert loaded.meta["count"] == 3

    def test_header_layout(self, ensemble, tmp_path):
        """Test the magic and little-endian dimensions."""
        raw = save_ensemble(ensemble, tmp_path / "ens.hmt1").read_bytes()
        assert raw[:4] == MAGIC
        assert HEADER.unpack_from(raw)[1:] == (1, 4, 3)
        assert len(raw) == HEADER.size + 3 * 16 * 16

    def test_sidecar_optional(self, ensemble, tmp_path):
        """Test files load without their JSON sidecar."""
        path = save_ensemble(ensemble, tmp_path / "ens.hmt1")
        sidecar_path(path).unlink()
        assert load_ensemble(path).meta == {}

    def test_bad_magic(self, tmp_path):
        """Test foreign files are rejected."""
        path = tmp_path / "bad.hmt1"
        path.write_bytes(HEADER.pack(b"XXXX", 1, 2, 1) + bytes(64))
        with pytest.raises(ArtifactError, match="magic"):
            load_ensemble(path)

    def test_truncated(self, ensemble, tmp_path):
        """Test a short data section is rejected."""
        path = save_ensemble(ensemble, tmp_path / "ens.hmt1")
        path.write_bytes(path.read_bytes()[:-16])
        with pytest.raises(ArtifactError, match="data bytes"):
            load_ensemble(path)

    def test_sidecar_disagrees(self, ensemble, tmp_path):
        """Test sidecar dimensions must match the header."""
        path = save_ensemble(ensemble, tmp_path / "ens.hmt1")
        side = sidecar_path(path)
        meta = json.loads(side.read_text())
        meta["N"] = 5
        side.write_text(json.dumps(meta))
        with pytest.raises(ArtifactError, match="disagrees"):
            load_ensemble(path)

    def test_missing_file(self, tmp_path):
        """Test a missing file is an ArtifactError."""
        with pytest.raises(ArtifactError):
            load_ensemble(tmp_path / "absent.hmt1")


class TestRunStore:
    """Tests for run directories and manifests."""

    def test_manifest_tracks_artifacts(self, tmp_path):
        """Test every write lands in the manifest."""
        store = RunStore(tmp_path / "run", "sample")
        store.write_config(ChainConfig(N=4))
        store.write_json("summary.json", {"passed": True})
        store.write_csv("moments.csv", [{"k": 2, "value": 1.0}])
        store.finish(True)
        record = RunRecord(tmp_path / "run")
        assert record.command == "sample"
        assert record.status == "passed"
        assert record.artifacts == {
            "config.json": "json",
            "moments.csv": "csv",
            "summary.json": "json",
        }
        assert record.missing() == []

    def test_read_back(self, tmp_path):
        """Test JSON and CSV artifacts are read back."""
        store = RunStore(tmp_path, "sde")
        store.write_json("summary.json", {"slope": -0.5})
        store.write_csv("rows.csv", [{"t": 0.0, "d": 1.0}, {"t": 1.0, "d": 0.6}])
        record = RunRecord(tmp_path)
        assert record.read_json("summary.json") == {"slope": -0.5}
        assert [row["d"] for row in record.read_csv("rows.csv")] == ["1.0", "0.6"]
        assert record.read_json("absent.json") is None
        assert record.read_csv("absent.csv") == []
        assert record.names("csv") == ["rows.csv"]

    def test_ensemble_artifact(self, ensemble, tmp_path):
        """Test ensembles are registered as hmt1."""
        store = RunStore(tmp_path, "sample")
        store.write_ensemble("ensemble.hmt1", ensemble)
        assert RunRecord(tmp_path).names("hmt1") == ["ensemble.hmt1"]
        assert load_ensemble(tmp_path / "ensemble.hmt1").count == 3

    def test_missing_artifact(self, tmp_path):
        """Test deleted artifacts are reported."""
        store = RunStore(tmp_path, "onevar")
        store.write_svg("map.svg", "<svg/>")
        (tmp_path / "map.svg").unlink()
        assert RunRecord(tmp_path).missing() == ["map.svg"]

    def test_unfinished_status(self, tmp_path):
        """Test runs that never finish have no status."""
        RunStore(tmp_path, "transport").write_text("log.txt", "started")
        assert RunRecord(tmp_path).status is None

    def test_no_manifest(self, tmp_path):
        """Test a directory without a manifest is an ArtifactError."""
        with pytest.raises(ArtifactError, match="no manifest"):
            RunRecord(tmp_path)

    def test_corrupt_manifest(self, tmp_path):
        """Test invalid manifest JSON is an ArtifactError."""
        (tmp_path / MANIFEST).write_text("{")
        with pytest.raises(ArtifactError, match="invalid JSON"):
            RunRecord(tmp_path)

    def test_failed_run(self, tmp_path):
        """Test finish(False) records a failure."""
        store = RunStore(tmp_path, "certify")
        store.finish(False)
        assert RunRecord(tmp_path).status == "failed"
