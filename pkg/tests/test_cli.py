import csv
import json

import numpy as np
import pytest
from sklearn.base import clone

from dlsscale.cli import main
from dlsscale.growth import GrowthCurveClassifier
from dlsscale.irt import RestScoreIRT
from dlsscale.mokken import MokkenScale
from dlsscale.pipeline import ANALYZE_FILES, HARVEST_FILES, SCORE_FILES
from dlsscale.scoring import SubscaleScorer

from .conftest import GOLDEN


def _inputs(d):
    return ["--registry", str(d / "registry.json"), "--iso-table", str(d / "iso-639-3.tab"),
            "--aliases", str(d / "aliases.tsv")]


def _run_all(d, out):
    assert main(["run", "--out", str(out), *_inputs(d)]) == 0


def _rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_harvest_fixture(demo, tmp_path):
    assert main(["harvest", "--out", str(tmp_path), *_inputs(demo)]) == 0
    doc = json.loads((tmp_path / "harvest.json").read_text())
    assert len(doc["records"]) == 12 and doc["failures"] == []
    assert all((tmp_path / f).exists() for f in HARVEST_FILES)
    unmapped = (tmp_path / "unmapped.tsv").read_text()
    assert unmapped.startswith("normalized_name\tcode\tfrequency")


def test_harvest_strict_vs_lenient(demo, tmp_path, capsys):
    (demo / "sources" / "speech-05.txt").unlink()
    assert main(["harvest", "--out", str(tmp_path / "a"), *_inputs(demo)]) == 1
    err = capsys.readouterr().err.strip().splitlines()[-1]
    assert json.loads(err)["exit_code"] == 1
    assert main(["harvest", "--lenient", "--out", str(tmp_path / "b"), *_inputs(demo)]) == 0
    doc = json.loads((tmp_path / "b" / "harvest.json").read_text())
    assert len(doc["records"]) == 11 and doc["failures"][0]["tool_id"] == "speech-05"
    mapped = json.loads((tmp_path / "b" / "mapped.json").read_text())
    assert "speech-05" not in [t["tool_id"] for t in mapped["tools"]]


def test_harvest_empty_registry(tmp_path):
    reg = tmp_path / "r.json"
    reg.write_text('{"tools": []}')
    assert main(["harvest", "--registry", str(reg), "--out", str(tmp_path / "o")]) == 0
    doc = json.loads((tmp_path / "o" / "harvest.json").read_text())
    assert doc == {"records": [], "failures": []}


def test_bad_registry_exit_code(tmp_path, capsys):
    reg = tmp_path / "r.json"
    reg.write_text('{"tools": [{"tool_id": "a", "category": "Audio", "source": "x",'
                   ' "extractor": {"kind": "lines"}}]}')
    assert main(["harvest", "--registry", str(reg), "--out", str(tmp_path / "o")]) == 1
    assert "Audio" in capsys.readouterr().err


def test_score_matches_golden(demo, tmp_path):
    _run_all(demo, tmp_path)
    assert (tmp_path / "boundaries.csv").read_bytes() == (GOLDEN / "boundaries.csv").read_bytes()


def test_matrix_reimport_round_trip(demo, tmp_path):
    _run_all(demo, tmp_path / "a")
    out_b = tmp_path / "b"
    out_b.mkdir()
    assert main(["score", "--out", str(out_b), "--iso-table", str(demo / "iso-639-3.tab"),
                 "--matrix", str(tmp_path / "a" / "matrix.csv")]) == 0
    for f in SCORE_FILES:
        assert (out_b / f).read_bytes() == (tmp_path / "a" / f).read_bytes(), f


def test_empty_category_marker(demo, tmp_path):
    reg = json.loads((demo / "registry.json").read_text())
    reg["tools"] = [t for t in reg["tools"] if t["category"] != "Assistant"]
    (demo / "registry.json").write_text(json.dumps(reg))
    assert main(["harvest", "--out", str(tmp_path), *_inputs(demo)]) == 0
    assert main(["score", "--out", str(tmp_path), "--iso-table", str(demo / "iso-639-3.tab")]) == 0
    rows = {r["category"]: r for r in _rows(tmp_path / "boundaries.csv")}
    assert rows["Assistant"]["status"] == "empty"


def test_analyze_artifacts(demo, tmp_path):
    _run_all(demo, tmp_path)
    for f in ANALYZE_FILES:
        assert (tmp_path / f).stat().st_size > 0, f
    h = _rows(tmp_path / "homogeneity.csv")
    assert [r["item"] for r in h] == ["Assistant", "Speech", "Meaning", "Localized", "Surface",
                                      "Encoding", "Content", "Full scale"]
    levels = _rows(tmp_path / "levels.csv")
    assert [r["level"] for r in levels] == ["Thriving", "Vital", "Ascending", "Emerging", "Still"]
    assessments = _rows(tmp_path / "assessments.csv")
    assert sum(int(r["languages"]) for r in levels) == len(assessments) == 40
    for r in assessments:
        assert (r["level"] == "Still") == (r["raw"] == "0")
        assert 0 <= float(r["proportion"]) <= 1
        assert float(r["adjusted"]) <= int(r["raw"])
    as_json = json.loads((tmp_path / "assessments.json").read_text())
    assert [a["code"] for a in as_json] == [r["code"] for r in assessments]
    irf = _rows(tmp_path / "irf.csv")
    assert len(irf) == 28
    diff = [float(r["difficulty"]) for r in _rows(tmp_path / "difficulty.csv")]
    assert diff == sorted(diff)
    curve = _rows(tmp_path / "curve.csv")
    assert len(curve) == sum(1 for r in assessments if r["raw"] != "0")


def test_analyze_twice_identical(demo, tmp_path):
    _run_all(demo, tmp_path)
    first = {f: (tmp_path / f).read_bytes() for f in ANALYZE_FILES}
    for f in ANALYZE_FILES:
        (tmp_path / f).unlink()
    assert main(["analyze", "--out", str(tmp_path)]) == 0
    assert {f: (tmp_path / f).read_bytes() for f in ANALYZE_FILES} == first


def test_analyze_without_scores(tmp_path, capsys):
    assert main(["analyze", "--out", str(tmp_path)]) == 1
    assert "StageError" in capsys.readouterr().err


def test_guttman_synth_full_scale_one(tmp_path):
    src = tmp_path / "in"
    assert main(["synth", "--out", str(src), "--seed", "3", "--languages", "120", "--tools", "28",
                 "--guttman"]) == 0
    _run_all(src, tmp_path / "out")
    full = _rows(tmp_path / "out" / "homogeneity.csv")[-1]
    assert full["item"] == "Full scale" and float(full["H"]) == 1.0
    steps = _rows(tmp_path / "out" / "homogeneity_steps.csv")[-1]
    assert float(steps["H"]) == 1.0


def test_synth_deterministic(tmp_path):
    for name in ("a", "b"):
        assert main(["synth", "--out", str(tmp_path / name), "--seed", "42",
                     "--languages", "200", "--tools", "20"]) == 0
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    assert len(files) == 20 + 3
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_synth_guttman_nested(tmp_path):
    from dlsscale.codemap import AliasTable, Iso639Table, map_harvest
    from dlsscale.registry import harvest_all, load_registry

    main(["synth", "--out", str(tmp_path), "--seed", "1", "--languages", "60", "--tools", "10",
          "--guttman"])
    iso = Iso639Table.from_tab(tmp_path / "iso-639-3.tab")
    sets, report = map_harvest(harvest_all(load_registry(tmp_path / "registry.json")).records,
                               iso, AliasTable.load(tmp_path / "aliases.tsv", iso))
    assert len(report) == 0
    groups = sorted((set(s) for s in sets.values()), key=len)
    assert all(a <= b for a, b in zip(groups, groups[1:]))


def test_report_formats(demo, tmp_path, capsys):
    _run_all(demo, tmp_path)
    capsys.readouterr()
    assert main(["report", "--out", str(tmp_path)]) == 0
    text = capsys.readouterr().out
    assert "Full scale" in text and "Thriving" in text
    assert main(["report", "--out", str(tmp_path), "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert set(doc) == {"boundaries", "homogeneity", "levels", "difficulty"}


@pytest.mark.parametrize("est", [SubscaleScorer(), MokkenScale(), RestScoreIRT(),
                                 GrowthCurveClassifier(max_score=10)])
def test_estimators_clone(est):
    c = clone(est)
    assert c.get_params() == est.get_params()
    c.set_params(**est.get_params())


def test_estimators_in_pipeline():
    from sklearn.pipeline import make_pipeline
    from sklearn.preprocessing import FunctionTransformer

    rng = np.random.default_rng(0)
    counts = rng.poisson(rng.uniform(0.2, 3, 7), size=(300, 7))
    from dlsscale.mokken import expand_items

    pipe = make_pipeline(
        SubscaleScorer(),
        FunctionTransformer(lambda L: expand_items(L).responses),
        RestScoreIRT(),
    )
    contrib = pipe.fit_transform(counts)
    assert contrib.shape == (300, 28)
