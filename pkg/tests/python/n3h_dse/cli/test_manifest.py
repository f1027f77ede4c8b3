import hashlib
import os

import n3h_dse
from n3h_dse.cli.common import format_table
from n3h_dse.cli.manifest import build_manifest


def test_manifest_from_inputs(tmp_path, monkeypatch):
    monkeypatch.delenv("SOURCE_DATE_EPOCH", raising=False)
    config = tmp_path / "config.json"
    config.write_text("{}")
    os.utime(config, (86400, 86400))

    manifest = build_manifest("cost", {"config": ("config.json", config), "device": ("D_A", None)}, seed=7)

    assert {"config": "config.json", "device": "D_A"} == manifest.config_paths, "inputs should be kept as given"
    assert {"config": hashlib.sha256(b"{}").hexdigest()} == manifest.input_digests, "only files are digested"
    assert "1970-01-02T00:00:00Z" == manifest.timestamp, "timestamp should follow the newest input"
    assert 7 == manifest.seed and n3h_dse.__version__ == manifest.version, "invalid seed or version"

    again = build_manifest("cost", {"device": ("D_A", None), "config": ("config.json", config)}, seed=7)
    assert manifest.json() == again.json(), "input order must not change the manifest"


def test_format_table():
    lines = format_table(["layer", "ratio"], [["1", "1.0000"], ["12", "0.25"]])
    assert ["layer   ratio", "    1  1.0000", "   12    0.25"] == lines, "columns should be right aligned"
