import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from phasetomo import stateio
from phasetomo.circuits import wigner_point_circuit
from phasetomo.errors import StateFileError
from phasetomo.phasespace import random_density, random_state


def test_format_complex():
    assert stateio.format_complex(1 - 2j) == "1-2i"
    assert stateio.format_complex(complex(-0.0, 0.5)) == "0+0.5i"
    assert stateio.parse_complex("0.25-1e-3i") == complex(0.25, -0.001)
    assert stateio.parse_complex("2") == 2


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_density_round_trip_exact(n, seed):
    rho = random_density(1 << n, rng=seed)
    back = stateio.loads(stateio.dumps(rho))
    assert np.array_equal(back, rho)


def test_state_round_trip(tmp_path):
    psi = random_state(8, rng=3)
    path = tmp_path / "psi.txt"
    stateio.save(path, psi)
    text = path.read_text()
    assert text.startswith("dim 8\n") and text.count("\n") == 2
    assert np.array_equal(stateio.load(path), psi)


def test_round_trip_reproduces_readouts(tmp_path):
    rho = random_density(4, rng=11)
    stateio.save(tmp_path / "rho.txt", rho)
    again = stateio.load(tmp_path / "rho.txt")
    for q, p in [(0, 0), (3, 5), (7, 7)]:
        a = wigner_point_circuit(rho, q, p).value
        b = wigner_point_circuit(again, q, p).value
        assert abs(a - b) < 1e-12


@pytest.mark.parametrize(
    "text",
    ["", "size 2\n1,0\n", "dim x\n", "dim 2\n1+0i\n", "dim 2\n1,0\n0,1\n0,0\n", "dim 2\n1,zz\n"],
)
def test_malformed_files(text):
    with pytest.raises(StateFileError):
        stateio.loads(text)


def test_format_csv():
    f = stateio.format_csv
    assert f(0.06249999999999997) == "0.0625"
    assert f(-0.0) == "0"
    assert f(1.0) == "1"
    assert f(7) == "7"
    assert f(float("nan")) == "nan"


def test_write_csv(tmp_path):
    rows = [(0, 1, 0.5), (1, 2, -0.25)]
    assert stateio.write_csv(tmp_path / "t.csv", ("a", "b", "c"), rows) == 2
    assert (tmp_path / "t.csv").read_bytes() == b"a,b,c\n0,1,0.5\n1,2,-0.25\n"
