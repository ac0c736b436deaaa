import pytest

from infogeom.expfam import builtin_families


@pytest.fixture(scope="session")
def families():
    """All built-in families with default parameters, keyed by registry name."""
    fams = builtin_families()
    keys = ["bernoulli", "binomial", "categorical", "poisson_trunc", "gauss_known_var", "exponential_dist"]
    return dict(zip(keys, fams))


@pytest.fixture(scope="session")
def discrete_families(families):
    return [families[k] for k in ("bernoulli", "binomial", "categorical", "poisson_trunc")]


@pytest.fixture(scope="session")
def quadrature_families(families):
    return [families[k] for k in ("gauss_known_var", "exponential_dist")]
