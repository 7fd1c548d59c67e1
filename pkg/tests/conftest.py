import pytest

from helpers import ACCEPTANCE, cached
from kerrq.operators import ModelParams


@pytest.fixture(scope="session")
def base():
    return ModelParams(delta=-2.0, kappa=0.5, u=1.0, epsilon=0.5, N=1.0)


@pytest.fixture(scope="session")
def eps_c20(base):
    from kerrq.meanfield import critical_pump

    return cached(("eps_c", 20.0), lambda: critical_pump(base, 20.0))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE, key=lambda s: int(s.split()[0])):
        ok, detail = ACCEPTANCE[cid]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {cid}: {detail}")
    n_ok = sum(ok for ok, _ in ACCEPTANCE.values())
    terminalreporter.write_line(f"{n_ok}/{len(ACCEPTANCE)} acceptance criteria passed")
