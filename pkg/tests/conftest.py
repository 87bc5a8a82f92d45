import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("csradar", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("csradar")

_ACCEPTANCE_LINES: list[str] = []


def dense_circulant(body):
    """Column j is body cyclically delayed by j (explicit O(n^2) oracle)."""
    body = np.asarray(body)
    return np.stack([np.roll(body, j) for j in range(body.shape[0])], axis=1)


def dense_operator(frames, pattern, include_nbi):
    """Explicit stacked dictionary: scaled circulants, then the inverse unitary DFT."""
    n = pattern.n
    k = np.arange(n)
    blocks = [dense_circulant(f.body) / np.sqrt(n) for f in frames]
    if include_nbi:
        blocks.append(np.exp(2j * np.pi * np.outer(k, k) / n) / np.sqrt(n))
    return np.hstack(blocks)[pattern.omega]


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def report():
    """Record a one-line acceptance verdict; echoed in the terminal summary."""

    def _report(name: str, ok: bool, detail: str = "") -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else "")
        print(line)
        _ACCEPTANCE_LINES.append(line)

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
