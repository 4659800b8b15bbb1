import pytest

from appsig import GenConfig, HfCentroid, LfCentroid

_CRITERIA: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance line; printed in the terminal summary."""

    def record(name: str, ok: bool, detail: str = "") -> bool:
        _CRITERIA.append((name, bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _CRITERIA:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" :: {detail}" if detail else ""))


@pytest.fixture
def hf_centroid():
    return HfCentroid(n=15, re0=0.4, im0=-0.3, mu=0.5, sigma=0.8, m=0, d=1,
                      rho=0.5, a=1.5, A_peak=2.0, tau=1e-3)


@pytest.fixture
def lf_centroid():
    return LfCentroid(a=500.0, A_peak=0.8, tau=0.1, q0=1.0, q1=1.0, q2=1.5, q3=1.0,
                      alpha=2.0, beta=3.0, dt=30.0, dd=10.0, n=4, sigma_n=0.02,
                      basis_mask=(True, True))


@pytest.fixture
def small_cfg():
    return GenConfig(master_seed=11, var_d=0.05, samples_per_cycle=100, cycles_per_signature=3,
                     signatures_per_appliance=4)
