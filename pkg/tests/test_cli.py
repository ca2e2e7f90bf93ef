import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from qwalk3.cli import EXIT_BAD_INPUT, EXIT_NONCONVERGENCE, EXIT_OK, BadInput, main, parse_init, parse_number, parse_theta
from qwalk3.walk import GROVER_THETA


def run(*args):
    buf = io.StringIO()
    code = main(list(args), stdout=buf)
    return code, buf.getvalue()


def csv_rows(text):
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    return header, np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]]).reshape(-1, len(header))


def meta(text):
    return dict(ln[2:].split(": ", 1) for ln in text.splitlines() if ln.startswith("# "))


class TestParsing:
    @pytest.mark.parametrize(
        "text,value",
        [("5pi/6", 5 * math.pi / 6), ("1/sqrt3", 1 / math.sqrt(3)), ("1/√3", 1 / math.sqrt(3)), ("π/2", math.pi / 2), ("acos(-1/3)", GROVER_THETA), ("-0.25", -0.25)],
    )
    def test_numbers(self, text, value):
        assert parse_number(text) == pytest.approx(value, abs=1e-15)

    @pytest.mark.parametrize("text", ["__import__('os')", "1/0", "abc", "2**", "sqrt(-1)"])
    def test_rejects_garbage(self, text):
        with pytest.raises(BadInput):
            parse_number(text)

    def test_theta(self):
        assert parse_theta("grover").theta == pytest.approx(GROVER_THETA)
        with pytest.raises(BadInput):
            parse_theta("0")
        with pytest.raises(BadInput):
            parse_theta("pi")

    def test_init(self):
        i = parse_init("0.6,0,0,-0.48,0.64,0")
        assert i.beta == pytest.approx(-0.48j)
        with pytest.raises(BadInput):
            parse_init("1,1,0")
        with pytest.raises(BadInput):
            parse_init("1,0")


class TestSimulate:
    def test_time_zero(self):
        code, out = run("simulate", "--time", "0", "--init", "0,1,0")
        assert code == EXIT_OK
        assert out.endswith("x,probability\n0,1.0\n")

    def test_time_zero_uniform_start(self):
        # three squares of 1/sqrt(3) add up to one ulp above 1
        code, out = run("simulate", "--time", "0")
        header, rows = csv_rows(out)
        assert header == ["x", "probability"]
        assert rows.shape == (1, 2) and rows[0, 0] == 0
        assert rows[0, 1] == pytest.approx(1.0, abs=4e-16)

    @pytest.mark.parametrize("schedule", ["main", "skip0", "skip1"])
    def test_probabilities(self, schedule):
        code, out = run("simulate", "--theta", "5pi/6", "--init", "0.6,0,0,-0.48,0.64,0", "--time", "120", "--schedule", schedule)
        assert code == EXIT_OK
        _, rows = csv_rows(out)
        p = rows[:, 1]
        assert np.all((p >= 0) & (p <= 1))
        assert abs(math.fsum(p) - 1) < 1e-9
        assert meta(out)["schedule"] == schedule

    def test_series(self):
        code, out = run("simulate", "--time", "4", "--series")
        _, rows = csv_rows(out)
        for t in range(5):
            assert abs(rows[rows[:, 0] == t, 2].sum() - 1) < 1e-12

    def test_json_and_file(self, tmp_path):
        path = tmp_path / "o.json"
        code, out = run("simulate", "--time", "10", "--format", "json", "--out", str(path))
        assert code == EXIT_OK and out == ""
        payload = json.loads(path.read_text())
        assert payload["columns"] == ["x", "probability"]
        assert payload["config"]["time"] == 10
        assert "approx_at_time" not in payload["config"]
        assert sum(r[1] for r in payload["rows"]) == pytest.approx(1, abs=1e-12)

    def test_skip0_gap_and_peak(self):
        code, out = run("simulate", "--schedule", "skip0", "--time", "500", "--theta", "5pi/6", "--init", "0,1,0")
        _, rows = csv_rows(out)
        x, p = rows[:, 0], rows[:, 1]
        # the coin-0 start puts about 0.797 of the mass in the atom
        assert p[np.abs(x) <= 3].sum() == pytest.approx(0.797, abs=0.01)
        assert p[(np.abs(x) >= 50) & (np.abs(x) <= 100)].sum() < 1e-6
        assert p[np.abs(x) > 110].sum() == pytest.approx(0.203, abs=0.01)

    def test_deterministic(self):
        a = run("simulate", "--theta", "2.3", "--time", "200")[1]
        b = run("simulate", "--theta", "2.3", "--time", "200")[1]
        assert a == b


class TestBadInput:
    @pytest.mark.parametrize(
        "args",
        [
            ("simulate", "--theta", "0"),
            ("simulate", "--theta", "pi"),
            ("simulate", "--init", "1,1,0"),
            ("simulate", "--time", "-3"),
            ("compare", "--time", "49"),
            ("spectrum", "--grid", "1"),
            ("delta", "--nodes", "16"),
            ("limit", "--schedule", "skip0"),
            ("simulate", "--schedule", "weekly"),
            ("frobnicate",),
        ],
    )
    def test_exit_two(self, args, capsys):
        code, _ = run(*args)
        assert code == EXIT_BAD_INPUT


class TestLimit:
    def test_density_grid(self):
        code, out = run("limit", "--theta", "5pi/6", "--init", "0,1,0", "--grid", "400")
        assert code == EXIT_OK
        m = meta(out)
        assert abs(float(m["total_mass"]) - 1) < 1e-6
        _, rows = csv_rows(out)
        inner = -(1 + 2 * math.cos(5 * math.pi / 6)) / 3
        gap = np.abs(rows[:, 0]) < inner
        assert gap.any()
        assert np.all(rows[gap, 1] == 0.0)
        assert np.all(rows[~gap, 1] > 0)

    def test_approx_rows(self):
        code, out = run("limit", "--approx-at-time", "100")
        _, rows = csv_rows(out)
        assert rows.shape == (200, 2)
        assert 0 not in rows[:, 0]
        mass = rows[:, 1].sum() + float(meta(out)["delta"])
        assert mass == pytest.approx(1, abs=0.05)


class TestSpectrumAndDelta:
    def test_spectrum(self):
        code, out = run("spectrum", "--theta", "5pi/6", "--grid", "512")
        assert code == EXIT_OK
        header, rows = csv_rows(out)
        assert header == ["k", "g", "h2", "h3", "overlap1", "overlap2", "overlap3"]
        np.testing.assert_allclose(rows[:, 4:].sum(axis=1), 1, atol=1e-8)
        assert np.all(np.abs(rows[:, 1]) <= 1 + 1e-12)
        assert int(meta(out)["skipped_sign_undefined"]) + len(rows) == 512

    def test_gap_velocities_avoid_window(self):
        _, rows = csv_rows(run("spectrum", "--theta", "5pi/6", "--grid", "4096")[1])
        h = np.abs(rows[:, 2:4])
        assert h.min() >= (math.sqrt(3) - 1) / 3 - 1e-12

    def test_grover_velocities_fill_support(self):
        _, rows = csv_rows(run("spectrum", "--grid", "4096")[1])
        h = np.sort(rows[:, 2:4].ravel())
        outer = math.sqrt(11 / 3) / 3
        assert h[0] == pytest.approx(-outer, abs=1e-3) and h[-1] == pytest.approx(outer, abs=1e-3)
        assert np.max(np.diff(h)) < 5e-3

    def test_delta(self):
        code, out = run("delta", "--theta", "grover", "--nodes", "512")
        assert code == EXIT_OK
        value = float(out.split()[1])
        assert value == pytest.approx(0.3593894676550436, abs=1e-10)

    def test_delta_json(self):
        code, out = run("delta", "--format", "json")
        assert json.loads(out)["delta"] == pytest.approx(0.3593894676550436, abs=1e-10)


class TestCompare:
    def test_grover(self):
        code, out = run("compare", "--time", "300")
        assert code == EXIT_OK
        m = meta(out)
        assert float(m["mean_abs_gap"]) < 1e-3
        assert "gap_window" not in m

    def test_gap_summary(self):
        code, out = run("compare", "--theta", "5pi/6", "--time", "300", "--format", "json")
        payload = json.loads(out)
        assert payload["gap_mass_approx"] == 0.0
        assert payload["gap_window"][1] == pytest.approx(0.2440169, abs=1e-7)


def test_nonconvergence_exit_code(monkeypatch):
    import qwalk3.cli as cli
    from qwalk3.quadrature import NonConvergenceError

    def boom(*a, **k):
        raise NonConvergenceError("forced")

    monkeypatch.setattr(cli, "delta_mass", boom)
    assert run("delta")[0] == EXIT_NONCONVERGENCE


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qwalk3", "simulate", "--time", "1"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "probability" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "qwalk3", "simulate", "--theta", "0"], capture_output=True, text=True)
    assert proc.returncode == 2
    assert "theta" in proc.stderr
