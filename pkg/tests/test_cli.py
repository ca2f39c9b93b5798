import json
import math
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest
from referencing import Registry, Resource

from solv import cli

SCHEMA_NAMES = ("report", "fourier", "quasipoly", "expand", "familyspec", "curvature")


def _schemas():
    root = resources.files("solv") / "schemas"
    return {name: json.loads((root / f"{name}.schema.json").read_text()) for name in SCHEMA_NAMES}


SCHEMAS = _schemas()
REGISTRY = Registry().with_resources((s["$id"], Resource.from_contents(s)) for s in SCHEMAS.values())


def validate(name, instance):
    jsonschema.Draft202012Validator(SCHEMAS[name], registry=REGISTRY).validate(instance)


@pytest.fixture
def spec(tmp_path):
    def write(data, name="spec.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        jsonschema.Draft202012Validator(SCHEMAS["familyspec"]).validate(data)
        return str(path)

    return write


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_schemas_are_valid():
    for schema in SCHEMAS.values():
        jsonschema.Draft202012Validator.check_schema(schema)


@pytest.mark.parametrize("theorem", ["t1", "t2", "t3", "t4", "t5"])
def test_verify_reports(capsys, theorem):
    code, out, _ = run(capsys, "verify", theorem)
    report = json.loads(out)
    validate("report", report)
    assert report["theorem"] == theorem
    assert code == (0 if report["pass"] else 1)
    assert report["pass"] == all(c["pass"] for c in report["checks"])


def test_verify_pretty_and_flag_positions(capsys):
    code, out, _ = run(capsys, "--format", "pretty", "verify", "t1")
    assert out.startswith("t1: ")
    code2, out2, _ = run(capsys, "verify", "t1", "--format", "pretty", "--seed", "3")
    assert code2 == code and out2.startswith("t1: ")
    code3, out3, _ = run(capsys, "--tol", "1e-6", "verify", "t1")
    assert code3 == code and json.loads(out3)["theorem"] == "t1"


def test_verify_tolerance_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("SOLV_TOL", "1e-9")
    code, out, _ = run(capsys, "verify", "t2")
    assert code in (0, 1)
    json.loads(out)
    monkeypatch.setenv("SOLV_TOL", "not-a-number")
    assert run(capsys, "verify", "t2")[0] == 3


def test_expand_fourier(capsys, spec):
    code, out, _ = run(capsys, "expand", "--spec", spec({"family": "cyclic_P"}), "--target", "K")
    assert code == 0
    d = json.loads(out)
    validate("expand", d)
    assert d["form"] == "fourier" and d["normal"] == "preset"
    assert d["fourier"]["k"] == 5
    assert d["fourier"]["content"]["B5"]["factor"] == "1/16"


def test_expand_quasipoly(capsys, spec):
    code, out, _ = run(capsys, "expand", "--spec", spec({"family": "equidistant_line"}))
    assert code == 0
    d = json.loads(out)
    validate("expand", d)
    assert d["form"] == "quasipoly"


def test_expand_pretty(capsys, spec):
    code, out, _ = run(capsys, "expand", "--spec", spec({"family": "cyclic_P"}), "--format", "pretty")
    assert code == 0 and "B5" in out


@pytest.mark.parametrize("method", ["symbolic", "numeric", "oracle"])
def test_curvature_methods_agree(capsys, spec, method):
    path = spec({"family": "cyclic_P", "params": {"a": "s/2", "b": "2 + s/3", "r": "1 + s^2/4"}})
    code, out, _ = run(capsys, "curvature", "--spec", path, "--at", "0.2,0.9", "--method", method)
    assert code == 0
    d = json.loads(out)
    validate("curvature", d)
    assert d["H"] == pytest.approx(1.4053617672318150820, rel=1e-6)
    assert d["K_paper"] == pytest.approx(1.5458973931676142915, rel=1e-6)
    assert ("K_intrinsic" in d) == (method == "oracle")


def test_curvature_leaf_intrinsic(capsys, spec):
    code, out, _ = run(capsys, "curvature", "--spec", spec({"family": "leaf_R"}), "--at", "0.1,0.2", "--method", "oracle")
    d = json.loads(out)
    assert code == 0
    assert d["K_paper"] == pytest.approx(-1.0, abs=1e-6)
    assert d["K_intrinsic"] == pytest.approx(0.0, abs=1e-4)


@pytest.mark.parametrize(
    "data, at, code",
    [
        ({"family": "cyclic_P", "params": {"a": 0, "b": "1/2", "r": 1}}, "0,4.0", 2),
        ({"family": "chart", "params": {"x": "s*t", "y": "s", "z": "0"}}, "0,0.5", 2),
        ({"family": "cyclic_P"}, "0,1", 3),
        ({"family": "nope"}, "0,1", 3),
        ({"family": "cyclic_P", "s_domain": [1, 0]}, "0,1", 2),
    ],
)
def test_curvature_exit_codes(capsys, tmp_path, data, at, code):
    path = tmp_path / "s.json"
    path.write_text(json.dumps(data))
    got, _, err = run(capsys, "curvature", "--spec", str(path), "--at", at)
    assert got == code and err.startswith("solv: error:")


def test_input_errors(capsys, tmp_path, spec):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "curvature", "--spec", str(bad), "--at", "0,0")[0] == 3
    assert run(capsys, "curvature", "--spec", str(tmp_path / "missing.json"), "--at", "0,0")[0] == 3
    assert run(capsys, "curvature", "--spec", spec({"family": "leaf_R"}), "--at", "zero")[0] == 3
    assert run(capsys, "mesh", "--spec", spec({"family": "leaf_R"}), "--grid", "2by2", "-o", str(tmp_path / "m.obj"))[0] == 3
    assert run(capsys, "mesh", "--spec", spec({"family": "leaf_R"}), "--grid", "1x5", "-o", str(tmp_path / "m.obj"))[0] == 3
    with pytest.raises(SystemExit):
        cli.main(["verify", "t9"])


def _obj(path):
    lines = path.read_text().splitlines()
    return [l for l in lines if l.startswith("v ")], [l for l in lines if l.startswith("f ")], [l for l in lines if l.startswith("l ")]


def test_mesh_counts_and_determinism(capsys, tmp_path, spec):
    path = spec({"family": "min_horo"})
    a, b = tmp_path / "a.obj", tmp_path / "b.obj"
    assert run(capsys, "mesh", "--spec", path, "--grid", "20x20", "-o", str(a))[0] == 0
    assert run(capsys, "mesh", "--spec", path, "--grid", "20x20", "-o", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    verts, faces, _ = _obj(a)
    assert len(verts) == 400 and len(faces) == 2 * 19 * 19
    for f in faces:
        assert all(1 <= int(i) <= 400 for i in f.split()[1:])


def test_mesh_curve_lies_on_circle(capsys, tmp_path, spec):
    path = spec({"family": "cyclic_P", "params": {"a": 0, "b": 2, "r": 1}, "s_domain": [0, 1], "t_domain": [0, 2 * math.pi]})
    out = tmp_path / "c.obj"
    assert run(capsys, "mesh", "--spec", path, "--grid", "1x24", "--curve", "-o", str(out))[0] == 0
    verts, faces, polylines = _obj(out)
    assert len(verts) == 24 and not faces and len(polylines) == 1
    for k, v in enumerate(verts):
        x, y, z = map(float, v.split()[1:])
        t = 2 * math.pi * k / 23
        assert (x, y, z) == pytest.approx((0.5, math.cos(t), math.log(2 + math.sin(t))), abs=1e-12)


def test_mesh_domain_error(capsys, tmp_path, spec):
    path = spec({"family": "cyclic_P", "params": {"a": 0, "b": "1/2", "r": 1}, "t_domain": [0, 6.28]})
    assert run(capsys, "mesh", "--spec", path, "--grid", "4x4", "-o", str(tmp_path / "x.obj"))[0] == 2


def test_console_script_subprocess(tmp_path):
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps({"family": "flat_horo", "params": {"lambda": 0, "mu": 1}}))
    proc = subprocess.run(
        [sys.executable, "-m", "solv.cli", "curvature", "--spec", str(spec), "--at", "0.1,0.2"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0, proc.stderr
    d = json.loads(proc.stdout)
    assert d["H"] == pytest.approx(3 * math.sqrt(11) / 20, rel=1e-10)
    assert abs(d["K_paper"]) < 1e-10
    proc = subprocess.run([sys.executable, "-m", "solv.cli", "verify", "t2"], capture_output=True, text=True, check=False)
    assert proc.returncode == (0 if json.loads(proc.stdout)["pass"] else 1)
