import math
import os
import pathlib

import numpy as np
import pytest

import evobc

DATA = pathlib.Path(os.environ.get("EVOBC_TEST_DATA_DIR", pathlib.Path(__file__).parent.parent / "data"))


def scalar_family():
    form = evobc.constant_form(evobc.GelfandTriple.identity(1), np.ones((1, 1)))
    return form, evobc.operator_family(form)


def test_periodic_scalar_is_constant():
    _, fam = scalar_family()
    grid = evobc.TimeGrid.uniform(math.log(2.0), 512)
    u = evobc.solve_linear_bvp(fam, evobc.BoundaryMap.identity(), evobc.ForcingTerm.constant(np.ones(1)),
                               np.zeros(1), grid)
    values = np.asarray(u.values)
    assert values.shape == (513, 1)
    assert np.max(np.abs(values - 1.0)) < 1e-8
    assert len(u.times) == 513


def test_certificate_flags():
    form, _ = scalar_family()
    c = evobc.certify(form, evobc.BoundaryMap.scalar(1.5),
                      evobc.TimeGrid.uniform(math.log(2.0), 64, evobc.Method.exact_autonomous))
    assert c.verdict == "well_posed"
    assert c.sufficient_energy["holds"]
    assert "holds" in c.sufficient_optimized
    singular = evobc.certify(form, evobc.BoundaryMap.scalar(2.0),
                             evobc.TimeGrid.uniform(math.log(2.0), 64, evobc.Method.exact_autonomous))
    assert singular.verdict == "singular"


def test_nonlinear_boundary_oracle():
    _, fam = scalar_family()
    phi = evobc.BoundaryMap.nonlinear(lambda x: 0.5 * np.sin(x), 0.5)
    r = evobc.solve_nonlinear_phi(fam, phi, evobc.ForcingTerm.constant(np.ones(1)),
                                  evobc.TimeGrid.uniform(1.0, 64, evobc.Method.exact_autonomous), 1e-14, 200)
    assert abs(r.x[0] - 0.34397552973145318) < 1e-8
    with pytest.raises(evobc.NotContractive):
        evobc.solve_nonlinear_phi(fam, evobc.BoundaryMap.nonlinear(lambda x: 3.5 * np.sin(x), 3.5),
                                  evobc.ForcingTerm.constant(np.ones(1)), evobc.TimeGrid.uniform(1.0, 16))


def test_errors_share_a_base():
    assert issubclass(evobc.NotWellPosed, evobc.Error)
    assert issubclass(evobc.ConfigError, evobc.Error)


def test_dirichlet_model():
    m = evobc.dirichlet_model(3)
    assert np.allclose(m.eigenvalues, [math.pi ** 2, 4 * math.pi ** 2, 9 * math.pi ** 2])


def test_run_command_exit_codes(tmp_path):
    code, _, _ = evobc.run_command("solve", str(DATA / "periodic.cfg"), str(tmp_path))
    assert code == 0
    assert (tmp_path / "trajectory.csv").exists()
    code, _, err = evobc.run_command("solve", str(DATA / "singular.cfg"), str(tmp_path))
    assert code == 3
    assert err
    code, _, _ = evobc.run_command("solve", str(DATA / "syntax_error.cfg"), str(tmp_path))
    assert code == 2


def test_default_seed_exported():
    assert isinstance(evobc.DEFAULT_SEED, int)
