import csv
import json

import numpy as np
import pytest

from jointirs.channel import sample_channels
from jointirs.cli import main
from jointirs.config import SystemConfig
from jointirs.designs import BcdOptions, DesignKind, bcd_joint, initial_state_from_theta
from jointirs.experiment import CSV_FIELDS, SweepSpec, realization_rng, run_sweep, write_outputs
from jointirs.metrics import DuplexParams
from jointirs.weighting import equal_weights

TINY = SystemConfig(bs_array=(2, 1), irs_array=(2, 2), num_users=2)


def test_sweep_spec_validation():
    with pytest.raises(ValueError):
        SweepSpec(alpha_grid=(0.5, 1.2))
    with pytest.raises(ValueError):
        SweepSpec(realizations=0)
    with pytest.raises(ValueError):
        SweepSpec(seed=-1)
    assert SweepSpec().alpha_grid[3] == 0.3


def test_single_cell_equals_direct_run():
    spec = SweepSpec((0.4,), (0.6,), 1, 99, (DesignKind.JOINT,))
    res = run_sweep(spec, TINY)
    rng_ch, rng_theta, _ = realization_rng(99, 0)
    ch = sample_channels(TINY, rng_ch)
    theta = np.exp(2j * np.pi * rng_theta.random(TINY.num_irs_elements))
    params = DuplexParams.from_config(TINY, 0.4, 0.6)
    sol = bcd_joint(ch, params, equal_weights(2), initial_state_from_theta(ch, params, theta),
                    BcdOptions.from_config(TINY))
    cell = res.points[(DesignKind.JOINT, 0.4, 0.6)]
    assert (cell.dl_mean, cell.ul_mean) == sol.rate_point.as_tuple()
    assert cell.outer_iters_mean == sol.iterations


def test_sweep_deterministic():
    spec = SweepSpec((0.3, 0.7), (0.0, 1.0), 2, 5)
    a, b = run_sweep(spec, TINY), run_sweep(spec, TINY)
    assert a.points == b.points
    for d in spec.designs:
        assert np.array_equal(a.envelopes[d], b.envelopes[d])
        assert np.array_equal(a.samples[d], b.samples[d])


def test_standard_error_scaling():
    designs = (DesignKind.JOINT,)
    small = run_sweep(SweepSpec((0.5,), (0.5,), 60, 1, designs), TINY)
    large = run_sweep(SweepSpec((0.5,), (0.5,), 240, 2, designs), TINY)
    key = (DesignKind.JOINT, 0.5, 0.5)
    # four times the realizations halves the standard error
    ratio = small.points[key].dl_stderr / large.points[key].dl_stderr
    assert ratio == pytest.approx(2.0, rel=0.2)


def test_fixed_designs_reuse_joint_endpoints():
    spec = SweepSpec((0.5,), (0.0, 0.5, 1.0), 1, 3)
    res = run_sweep(spec, TINY)
    joint_dl = res.points[(DesignKind.JOINT, 0.5, 1.0)]
    fixed_dl = res.points[(DesignKind.FIXED_DOWNLINK, 0.5, 0.5)]
    assert (joint_dl.dl_mean, joint_dl.ul_mean) == (fixed_dl.dl_mean, fixed_dl.ul_mean)


def test_write_outputs_schema(tmp_path):
    spec = SweepSpec((0.0, 1.0), (0.5,), 2, 1)
    res = run_sweep(spec, TINY)
    write_outputs(res, TINY, tmp_path)
    with (tmp_path / "joint.csv").open() as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == CSV_FIELDS
    assert len(rows) == 3
    assert all(len(r[3].replace(".", "").lstrip("0")) <= 12 for r in rows[1:])
    with (tmp_path / "metrics.csv").open() as fh:
        metric_rows = list(csv.reader(fh))
    assert metric_rows[0] == ["design_pair", "metric", "value"]
    assert {r[1] for r in metric_rows[1:]} == {"max_dl_gain", "max_ul_gain", "max_dl_loss", "max_ul_loss"}
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["realizations"] == 2


def test_cli_help(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    assert "--alpha-grid" in capsys.readouterr().out


def test_cli_missing_config(tmp_path, capsys):
    path = tmp_path / "nowhere.json"
    assert main(["--config", str(path)]) == 2
    assert str(path) in capsys.readouterr().err


def test_cli_malformed_config(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text('{"num_users": 2, "irs_shape": [2, 2]}')
    assert main(["--config", str(path)]) == 2


def test_cli_unknown_flag():
    with pytest.raises(SystemExit) as exc:
        main(["--frobnicate"])
    assert exc.value.code == 2


def test_cli_unwritable_output(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(TINY.to_dict()))
    blocker = tmp_path / "file"
    blocker.write_text("")
    code = main(["--config", str(cfg), "--realizations", "1", "--alpha-grid", "0.5", "--beta-grid", "0.5",
                 "--design", "joint", "--out", str(blocker / "sub")])
    assert code != 0


def test_cli_small_run(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(TINY.to_dict()))
    out = tmp_path / "out"
    code = main(["--config", str(cfg), "--duplex", "fdd", "--weighting", "independent", "--seed", "4",
                 "--realizations", "2", "--alpha-grid", "0,0.5,1", "--beta-grid", "0,1", "--out", str(out)])
    assert code == 0
    for d in DesignKind:
        assert (out / f"{d.value}.csv").exists()
    for name in ("envelope.csv", "metrics.csv", "summary.json"):
        assert (out / name).exists()
    assert json.loads((out / "summary.json").read_text())["config"]["duplex"] == "fdd"


def test_cli_pf_weighting(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({**TINY.to_dict(), "pf_slots": 5}))
    code = main(["--config", str(cfg), "--weighting", "pf", "--realizations", "1", "--alpha-grid", "0.5",
                 "--beta-grid", "0.5", "--design", "joint", "--out", str(tmp_path / "o")])
    assert code == 0
