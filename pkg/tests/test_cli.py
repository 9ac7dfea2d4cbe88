import io
import json
import subprocess
import sys

import pytest

from hecke.cli import dumps, parse_real, run


def call(*argv, stdin=None):
    out, err = io.StringIO(), io.StringIO()
    if stdin is not None:
        old = sys.stdin
        sys.stdin = io.StringIO(stdin)
    try:
        code = run(list(argv), out, err)
    finally:
        if stdin is not None:
            sys.stdin = old
    return code, out.getvalue(), err.getvalue()


def lines(text):
    return [json.loads(s) for s in text.splitlines() if s.strip()]


def test_constants_q5():
    code, out, _ = call("constants", "--q", "5")
    assert code == 0
    d = json.loads(out)
    assert d["schema"] == 1
    assert d["R"] == pytest.approx(0.8270909, abs=1e-7)
    assert abs(d["residuals"]["quadratic"]) <= 1e-12


def test_length_q3():
    code, out, _ = call("length", "--q", "3", "--cycle", "3")
    assert code == 0
    assert json.loads(out)["length"] == pytest.approx(1.9248473, abs=1e-7)


def test_expand_snaps_landmark():
    code, out, _ = call("expand", "--q", "4", "--x", "-0.7071068")
    assert code == 0
    d = json.loads(out)
    assert d["code"] == "0;1" and d["finite"]


def test_expand_exact_disables_snap():
    code, out, _ = call("expand", "--q", "4", "--x", "-0.7071068", "--exact", "--digits", "5")
    assert json.loads(out)["code"] != "0;1"


def test_parse_real():
    from hecke.context import make_context
    ctx = make_context(4)
    assert parse_real(ctx, "-0.7071068") == -ctx.half
    assert parse_real(ctx, "-0.7071068", exact=True) == -0.7071068
    assert parse_real(ctx, "0.25") == 0.25


def test_dual_and_partition():
    code, out, _ = call("dual", "--q", "4", "--x", "-0.2", "--digits", "3")
    assert json.loads(out)["code"].startswith("0;3")
    code, out, _ = call("partition", "--q", "5")
    d = json.loads(out)
    assert d["kappa"] == 3 and len(d["phi"]) == 4


def test_omega_csv():
    code, out, _ = call("omega", "--q", "4")
    rows = out.strip().splitlines()
    assert rows[0] == "region,piece,vertex,x,y"
    regions = {r.split(",")[0] for r in rows[1:]}
    assert {"omega", "omega_star", "omega_strong"} <= regions


def test_reduce_and_batch():
    code, out, _ = call("reduce", "--q", "3", "--xi", "1.4142135623730951", "--eta", "-1.7320508075688772")
    d = json.loads(out)
    assert code == 0 and d["word"] and "bicode" in d
    code, out, _ = call("reduce", "--q", "4", "--batch", stdin="2.5,0.3\n3.7,-0.2\n")
    assert code == 0 and len(lines(out)) == 2


def test_trace_stream():
    code, out, _ = call("trace", "--q", "3", "--xi", "2.618", "--eta", "-0.39", "--returns", "4", "--engine", "both")
    recs = lines(out)
    assert code == 0
    assert [r["step"] for r in recs] == [0, 1, 2, 3, 4]
    assert recs[-1]["cumulative_time"] == pytest.approx(sum(r["time"] for r in recs))


def test_measure_report(tmp_path):
    png = tmp_path / "d.png"
    code, out, _ = call("measure", "--q", "4", "--birkhoff", "20000", "--plot", str(png))
    d = json.loads(out)
    assert code == 0
    assert d["mass"] == pytest.approx(3.5254943, abs=1e-7)
    assert "birkhoff" in d and d["birkhoff"]["iterations"] == 20000
    assert png.stat().st_size > 0


def test_measure_csv():
    code, out, _ = call("measure", "--q", "3", "--csv", "--resolution", "9")
    assert code == 0
    assert len(out.strip().splitlines()) == 10


def test_plots(tmp_path):
    p1, p2 = tmp_path / "o.png", tmp_path / "t.png"
    assert call("omega", "--q", "5", "--plot", str(p1))[0] == 0
    assert call("trace", "--q", "4", "--xi", "3.3", "--eta", "-0.1", "--returns", "5", "--plot", str(p2))[0] == 0
    assert p1.stat().st_size > 0 and p2.stat().st_size > 0


def test_exit_codes():
    assert call("expand", "--q", "4")[0] == 1
    assert call("bogus")[0] == 1
    assert call("expand", "--q", "4", "--x", "abc")[0] == 1
    code, _, err = call("expand", "--q", "2", "--x", "1")
    assert code == 2 and json.loads(err)["error"] == "InvalidParameter"
    assert call("length", "--q", "3", "--cycle", "1")[0] == 2
    assert call("reduce", "--q", "4", "--xi", "1", "--eta", "1")[0] == 2


def test_deterministic():
    argv = ("measure", "--q", "5", "--birkhoff", "5000", "--seed", "3")
    assert call(*argv)[1] == call(*argv)[1]


def test_json_floats_roundtrip():
    x = 0.1 + 0.2
    assert json.loads(dumps({"x": x}))["x"] == x


def test_console_script():
    res = subprocess.run([sys.executable, "-m", "hecke.cli", "constants", "--q", "4"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["R"] == 1
