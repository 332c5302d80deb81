from __future__ import annotations

import numpy as np
import pytest
from hypothesis import strategies as st

from protinfer import Psm, build_graph

# z1 = {y1, y4, y5}, z2 = {y2, y4, y5}, z3 = {y2, y3}; y1 and y3 unique
TOY_MEMBERSHIPS = [
    ("Y1", "Z1"), ("Y4", "Z1"), ("Y5", "Z1"),
    ("Y2", "Z2"), ("Y4", "Z2"), ("Y5", "Z2"),
    ("Y2", "Z3"), ("Y3", "Z3"),
]


def graph_from(b: dict[str, float], memberships, *, prefix: str = "S"):
    """One PSM per peptide carrying probability b (b must lie in [0, 1])."""
    psms = [Psm(f"{prefix}{i:04d}", pep, p) for i, (pep, p) in enumerate(sorted(b.items()))]
    return build_graph(psms, memberships)


def unit_graph(counts: dict[str, int], memberships):
    """PSMs with probability 1, ``counts[pep]`` per peptide."""
    psms = []
    for pep, n in sorted(counts.items()):
        psms += [Psm(f"{pep}_{i}", pep, 1.0) for i in range(n)]
    return build_graph(psms, memberships)


def toy_graph(b=None):
    b = b or {"Y1": 0.9, "Y2": 0.6, "Y3": 0.8, "Y4": 0.5, "Y5": 0.7}
    return graph_from(b, TOY_MEMBERSHIPS)


def random_bipartite(rng: np.random.Generator, n_peptides: int, n_proteins: int,
                     p_extra: float = 0.3):
    """Membership pairs where every peptide has at least one parent."""
    pairs = set()
    for j in range(n_peptides):
        pairs.add((f"y{j}", f"z{int(rng.integers(n_proteins))}"))
        for k in range(n_proteins):
            if rng.random() < p_extra:
                pairs.add((f"y{j}", f"z{k}"))
    return sorted(pairs)


@st.composite
def small_graphs(draw, max_peptides: int = 8, max_proteins: int = 5, shared: bool = True):
    """(memberships, peptide abundances) with abundances in [0, 1]."""
    m = draw(st.integers(1, max_peptides))
    n = draw(st.integers(1, max_proteins))
    pairs = set()
    for j in range(m):
        parents = {draw(st.integers(0, n - 1))}
        if shared:
            parents |= set(draw(st.lists(st.integers(0, n - 1), max_size=n)))
        pairs |= {(f"Y{j}", f"Z{k}") for k in parents}
    b = {f"Y{j}": draw(st.floats(0.0, 1.0, allow_nan=False)) for j in range(m)}
    return sorted(pairs), b


# -- acceptance report -------------------------------------------------------

_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def acceptance():
    def record(number: int, ok: bool, detail: str) -> None:
        _ACCEPTANCE[number] = (bool(ok), detail)
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
