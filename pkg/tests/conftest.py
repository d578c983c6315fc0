import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from liehodge import lie_core, models  # noqa: E402

_ACCEPTANCE = {}


@pytest.fixture
def record():
    """Store a one-line verdict for an acceptance criterion."""

    def _record(number, title, passed, detail=""):
        line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}"
        if detail:
            line += f"  [{detail}]"
        _ACCEPTANCE[number] = line
        print(line)
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[k])


def corpus_algebras():
    return {
        "su2": models.su2(),
        "sl2r": models.sl2r(),
        "h3": models.heisenberg(),
        "abelian3": models.abelian(3),
    }


def corpus_cases():
    """(name, frame, module) over the standard corpus with trivial and adjoint modules."""
    out = []
    for name, spec in corpus_algebras().items():
        frame = lie_core.build_frame(spec)
        out.append((f"{name}-trivial", frame, models.trivial_module(spec.dim)))
        out.append((f"{name}-adjoint", frame, models.adjoint_module(frame)))
    return out


@pytest.fixture(scope="session")
def corpus():
    return corpus_cases()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
