import json
import math

import pytest

import qys

HYP = dict(
    names=["x", "y", "z"],
    metric=[["z^(-2)", "0", "0"], ["z^(-2)", "0"], ["z^(-2)"]],
    constraints=["z"],
)


def test_eval_expr():
    assert qys.eval_expr("x^2+sin(y)", ["x", "y"], [2.0, 0.0]) == 4.0
    with pytest.raises(ValueError):
        qys.eval_expr("x^2+", ["x"], [1.0])


def test_scalar_curvature_space_forms():
    assert qys.scalar_curvature(["x", "y"], [["1", "0"], ["1"]], [0.3, -0.7]) == 0.0
    scal = qys.scalar_curvature(HYP["names"], HYP["metric"], [0.1, 0.2, 1.3],
                                constraints=HYP["constraints"])
    assert abs(scal + 6.0) < 1e-10


def test_hessian_and_laplacian():
    h = qys.hessian(HYP["names"], HYP["metric"], "-ln(z)", [0.0, 0.0, 1.0],
                    constraints=HYP["constraints"])
    assert abs(h[0][0] - 1.0) < 1e-12
    assert abs(h[2][2]) < 1e-12
    lap = qys.laplacian(HYP["names"], HYP["metric"], "-ln(z)", [0.0, 0.0, 1.0],
                        constraints=HYP["constraints"])
    assert abs(lap - 2.0) < 1e-12


def test_fit_and_residual():
    pts = [[0.1 * i, -0.05 * i, 0.5 + 0.1 * i] for i in range(8)]
    fit = qys.fit_constants(HYP["names"], HYP["metric"], "-ln(z)", pts,
                            constraints=HYP["constraints"])
    assert abs(fit["lambda"] + 7.0) < 1e-9
    assert abs(fit["mu"] - 1.0) < 1e-9
    assert fit["identifiable"]

    exact = qys.soliton_residual_max(HYP["names"], HYP["metric"], "-ln(z)",
                                     -7.0, 1.0, pts,
                                     constraints=HYP["constraints"])
    claimed = qys.soliton_residual_max(HYP["names"], HYP["metric"], "-ln(z)",
                                       -8.0, 2.0, pts,
                                       constraints=HYP["constraints"])
    assert exact < 1e-10
    assert claimed > 0.1


def test_run_builtin_report():
    names = qys.builtin_names()
    assert "gaussian-soliton" in names
    rep = json.loads(qys.run_builtin("gaussian-soliton"))
    assert rep["scenario"] == "gaussian-soliton"
    assert not rep["failed"]
    verdicts = {c["id"]: c["verdict"] for c in rep["checks"]}
    assert verdicts["trace-identity"] == "pass"
    assert verdicts["fit-constants"] == "report-only"


def test_run_scenario_json_roundtrip():
    text = qys.builtin_json("hyperbolic-halfspace")
    rep = json.loads(qys.run_scenario_json(text, points=8))
    assert rep["environment"]["points"] == 8
    assert not rep["failed"]
    audit = next(c for c in rep["checks"] if c["id"] == "paper-constants-audit")
    assert audit["max"] > 0.1

    strict = json.loads(qys.run_scenario_json(text, points=8, strict=True))
    assert strict["failed"]


def test_determinism():
    a = qys.run_builtin("line-exp-warped-witness")
    b = qys.run_builtin("line-exp-warped-witness")
    assert a == b


def test_errors_map_to_value_error():
    with pytest.raises(ValueError):
        qys.run_builtin("no-such-scenario")
    with pytest.raises(ValueError):
        qys.run_scenario_json("{not json")
    with pytest.raises(ValueError):
        qys.scalar_curvature(["x"], [["x"]], [-1.0])  # metric not positive
