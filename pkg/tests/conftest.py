import pytest

from ainfring.bigraded import symmetric_window
from ainfring.cech import standard_contraction
from ainfring.transfer import transfer


@pytest.fixture(scope="session")
def w4():
    return symmetric_window(4, 4)


@pytest.fixture(scope="session")
def canonical(w4):
    """Canonical transferred structure on p in [-4,4] through arity 4, with its contraction."""
    con = standard_contraction(1, w4)
    m, phi = transfer(con, w4, 4)
    return con, m, phi
