"""The JIT and pure-numpy kernel paths give the same numbers."""
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

PROBE = Path(__file__).with_name("parity_probe.py")


def _probe(tmp_path, disable: bool) -> dict:
    out = tmp_path / f"probe_{int(disable)}.npz"
    env = dict(os.environ, ADHFRIC_DISABLE_NUMBA="1" if disable else "0")
    subprocess.run([sys.executable, str(PROBE), str(out)], env=env, check=True, timeout=600)
    with np.load(out) as data:
        return dict(data)


@pytest.fixture(scope="module")
def probes(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("parity")
    return _probe(tmp, False), _probe(tmp, True)


def test_switch_is_honoured(probes):
    jit, ref = probes
    assert bool(ref["use_numba"]) is False
    pytest.importorskip("numba")
    assert bool(jit["use_numba"]) is True


@pytest.mark.parametrize("key", ["tn", "dtn", "strip_ea_f_int", "strip_ea_f_c", "strip_ea_K",
                                 "strip_di_f_c", "strip_di_K", "cylinders_frictionless_f_c",
                                 "cylinders_frictionless_K", "cylinders_u"])
def test_paths_agree(probes, key):
    jit, ref = probes
    a, b = jit[key], ref[key]
    assert a.shape == b.shape
    scale = max(np.abs(b).max(), 1e-300)
    assert np.abs(a - b).max() <= 1e-11 * scale
