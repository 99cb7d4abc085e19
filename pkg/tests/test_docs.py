import doctest

import pytest

import polyeiv.moments
import polyeiv.noise
import polyeiv.wild


@pytest.mark.parametrize("mod", [polyeiv.moments, polyeiv.noise, polyeiv.wild])
def test_docstring_examples(mod):
    res = doctest.testmod(mod)
    assert res.failed == 0 and res.attempted > 0
