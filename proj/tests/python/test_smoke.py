import json
import math
from pathlib import Path

import pytest

import narrm

CONFIGS = Path(__file__).resolve().parents[2] / "configs"


def test_q_inv_and_usage():
    assert narrm.q_inv(1e-5) == pytest.approx(4.264890793922824610, rel=1e-9)
    assert narrm.channel_usage(256, 1e-5, 10.0) == pytest.approx(90.88654300696258142, rel=1e-9)
    with pytest.raises(ValueError):
        narrm.q_inv(0.0)


def small_scenario(horizon=3000):
    c = narrm.ScenarioConfig()
    c.horizon = horizon
    c.seed = 11
    return c


def test_series_and_windows():
    s = narrm.generate_series(small_scenario())
    x = s["interference"]
    assert len(x) == 3000 and min(x) >= 0.0
    inputs, targets = narrm.make_windows(x, 5)
    assert inputs.shape == (2995, 5)
    # newest first
    assert inputs[0, 0] == x[4] and inputs[0, 4] == x[0] and targets[0] == x[5]
    again = narrm.generate_series(small_scenario())
    assert list(again["interference"]) == list(x)


def test_train_and_trace(tmp_path):
    x = list(narrm.generate_series(small_scenario())["interference"])
    out = narrm.train_narnn(x, n_delays=4, n_hidden=3, max_epochs=8, seed=3)
    model = out["model"]
    assert model.parameter_count == 4 * 3 + 3 + 3 + 1
    assert out["epochs"] <= 8 and math.isfinite(out["test_mse"])
    assert out["history_csv"].startswith("epoch,")

    path = tmp_path / "m.bin"
    model.save(str(path))
    back = narrm.load_model(str(path))
    assert list(back.parameters()) == list(model.parameters())

    warm, pred = narrm.trace("nar", x, model, alpha=1.5)
    assert warm == 4 and len(pred) == len(x) - 4 and min(pred) >= 0.0
    warm, pred = narrm.trace("genie", x)
    assert list(pred) == x[warm:]
    with pytest.raises(ValueError):
        narrm.trace("nar", x)


def test_sweep_from_config():
    cfg = json.loads((CONFIGS / "smoke.json").read_text())
    cfg["sweep"]["total_steps"] = 10000
    cfg["predictors"] = [{"kind": "genie"}, {"kind": "iir"}]
    csv = narrm.sweep(json.dumps(cfg), threads=2)
    lines = csv.strip().splitlines()
    assert len(lines) == 1 + 2 * len(cfg["sweep"]["eps_targets"])
    assert csv == narrm.sweep(json.dumps(cfg), threads=1)

    cfg["bogus"] = 1
    with pytest.raises(narrm.ConfigError):
        narrm.config_echo(json.dumps(cfg))
