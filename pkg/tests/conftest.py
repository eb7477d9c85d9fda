import pytest

from polymod.coxeter import parse_symbol, reflection_generators, reduce_generators
from polymod.groupkit import closure
from polymod.rings import QuadInt, SQRT5, tau_residue_ring


@pytest.fixture(scope="session")
def d353():
    return parse_symbol("[3,5,3]")


@pytest.fixture(scope="session")
def gens353(d353):
    return reflection_generators(d353)


@pytest.fixture(scope="session")
def ring_sqrt5():
    return tau_residue_ring(SQRT5)


@pytest.fixture(scope="session")
def G353_sqrt5(gens353, ring_sqrt5):
    red, _ = reduce_generators(gens353, ring_sqrt5)
    return closure(red, ring_sqrt5)


@pytest.fixture(scope="session")
def ring_mod2():
    return tau_residue_ring(QuadInt(2))


@pytest.fixture(scope="session")
def G353_mod2(gens353, ring_mod2):
    red, _ = reduce_generators(gens353, ring_mod2)
    return closure(red, ring_mod2)
