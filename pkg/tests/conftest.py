import pytest

from liesym.jets import load_pde
from liesym.liealg import reference_basis
from importlib import resources


@pytest.fixture(scope="session")
def pde():
    return load_pde(resources.files("liesym.data").joinpath("kdv31.pde").read_text())


@pytest.fixture(scope="session")
def basis(pde):
    return reference_basis(pde)
