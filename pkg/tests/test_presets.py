import json

import pytest

from cesim.presets import preset_cells, preset_metric, run_preset


def test_fig1_cell_layout():
    cells = preset_cells("fig1", seed=0)
    assert len(cells) == 17  # 4 rules x 4 f-values + fault-free baseline
    names = [c["name"] for c in cells]
    assert len(set(names)) == 17
    assert "baseline_mean_f0" in names
    rules = {c["rule"] for c in cells}
    assert rules == {"ce", "cwtm", "multi_krum", "mean"}
    # one shared step size across every cell
    alphas = {c["doc"]["schedule"]["alpha"] for c in cells}
    assert len(alphas) == 1


def test_fig2_fig3_cell_layout():
    for name in ("fig2", "fig3"):
        cells = preset_cells(name, seed=0)
        assert len(cells) == 8  # T in {1,3} x f in {2,5,8,10}
        assert {c["rule"] for c in cells} == {"ce"}
        assert {c["T"] for c in cells} == {1, 3}
    kinds = {c["doc"]["instance"]["kind"] for c in preset_cells("fig3", 0)}
    assert kinds == {"sigmoid_norm"}


def test_preset_metric():
    assert preset_metric("fig1") == "optimality_gap"
    assert preset_metric("fig2") == "optimality_gap"
    assert preset_metric("fig3") == "mean_sq_grad"


def test_unknown_preset_rejected():
    with pytest.raises(ValueError):
        preset_cells("fig9", 0)


def test_run_preset_outputs(tmp_path):
    out = tmp_path / "fig3"
    manifest = run_preset("fig3", str(out), seed=0)
    assert manifest["metric"] == "mean_sq_grad"
    assert len(manifest["cells"]) == 8
    for cell in manifest["cells"]:
        assert cell["aborted"] is None
        assert cell["summary"] is not None
        assert (out / cell["csv"]).exists()
        assert (out / f"{cell['name']}.config.json").exists()
        assert len((out / cell["csv"]).read_text().strip().split("\n")) == 52
    assert json.loads((out / "summary.json").read_text())["preset"] == "fig3"
    assert (out / "plot.py").exists()
    assert (out / "fig3.png").exists()
