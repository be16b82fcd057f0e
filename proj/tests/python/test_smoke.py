# Copyright 2026 The saddle Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import cmath
import json
import math
import pathlib

import pytest

import saddle

ROOT = pathlib.Path(__file__).resolve().parents[2]


def test_version():
    assert saddle.__version__ == "0.1.0"


def test_gamma_reflection():
    for y in (-3.0, 0.0, 1.7):
        g = saddle.complex_gamma(complex(0.5, y))
        assert abs(abs(g) ** 2 * math.cosh(math.pi * y) / math.pi - 1.0) < 1e-10


def test_lattice_and_ladder():
    points, indices = saddle.gamma0_lattice([1.0], 0.1, 0.2)
    assert [p.imag for p in points] == pytest.approx([-0.05, -0.15])
    assert indices == [[0], [1]]
    assert saddle.mu_ladder([1.0, 2.0], 3.0) == pytest.approx([0.0, 1.0, 2.0, 3.0])


def test_one_dimensional_transition():
    model = saddle.barrier_model([1.0])
    sc = saddle.scenario(model, h=0.1, epsilon=0.1)
    ev = saddle.d0_closed_form(sc, [0.05], [], 0.0, 0.1)
    assert abs(ev["d0"]) == pytest.approx(math.sqrt(math.pi * 0.1 / 0.05), rel=1e-8)
    prod = ev["F_gamma"] * ev["F_bracket"] * ev["F_geom"] * ev["F_action"] * ev["F_jac"]
    assert abs(prod - ev["d0"]) <= 1e-12 * abs(ev["d0"])
    ju = saddle.apply_J_point(sc, 1.0, [[0.05]], 0.0, 0.1)
    assert abs(ju[0]) == pytest.approx(1.0, rel=1e-8)
    with pytest.raises(saddle.PoleError):
        saddle.d0_closed_form(sc, [0.05], [], complex(0.0, -0.05), 0.1)


def test_oracle():
    r = saddle.weber_connection(1.0, 0.0, 0.1)
    assert r["transmission_probability"] == pytest.approx(0.5, abs=1e-8)
    res = saddle.scaled_resonances(1.0, 0.05, 2)
    assert res[0] == pytest.approx(complex(0, -0.025), rel=1e-4)


def test_validation_error():
    with pytest.raises(ValueError):
        saddle.barrier_model([1.0, -2.0])


def test_cli_in_process(tmp_path):
    code, log, err = saddle.run("lattice", str(ROOT / "configs" / "lattice_example.json"), str(tmp_path))
    assert code == 0, err
    lines = (tmp_path / "lattice.csv").read_text().splitlines()
    assert lines[1].startswith("# saddle 0.1.0 config=")
    assert lines[2:] == ["re,im,alpha_0", "0,-0.05,0", "0,-0.15,1"]
    report = json.loads((tmp_path / "lattice.json").read_text())
    assert "meta" in report
    code, _, err = saddle.run("lattice", str(ROOT / "tests" / "data" / "bad_lambda.json"), str(tmp_path))
    assert code == 2
    assert "model.lambdas[1]" in err
