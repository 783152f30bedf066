import pytest

from flowscape.grid import GridSpec
from flowscape.law import VisitationSpectrum


@pytest.fixture
def grid10() -> GridSpec:
    return GridSpec(n_cols=10, n_rows=10)


def exact_law_spectrum(mu: float, max_r: int, max_f: int, dest_cell: int = 0) -> VisitationSpectrum:
    """Noiseless real-valued spectrum drawn straight from the law,
    one origin cell per ring."""
    bins = {(r, f): mu / (r * f) ** 2
            for r in range(1, max_r + 1) for f in range(1, max_f + 1)}
    return VisitationSpectrum.from_bins(dest_cell, bins)
