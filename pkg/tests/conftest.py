import numpy as np
import pytest

from sqdkit.integrals import write_fcidump
from sqdkit.lucj import LucjLayer, LucjParameters, save_parameters
from tests.oracles import random_table


@pytest.fixture(scope="session")
def toy_workspace(tmp_path_factory):
    """Integral and parameter files shared by the pipeline and CLI tests."""
    root = tmp_path_factory.mktemp("toyws")
    write_fcidump(random_table(3, 2, seed=7), root / "toy.fcidump")
    write_fcidump(random_table(3, 2, seed=8), root / "toy2.fcidump")
    save_parameters(LucjParameters.zeros(3), root / "zero_params.json")
    save_parameters(LucjParameters.zeros(2), root / "small_params.json")

    rng = np.random.default_rng(3)
    K = rng.normal(scale=0.1, size=(3, 3))
    K = K - K.T
    Jaa = rng.normal(scale=0.1, size=(3, 3))
    Jaa = 0.5 * (Jaa + Jaa.T)
    Jab = rng.normal(scale=0.1, size=(3, 3))
    Jab = 0.5 * (Jab + Jab.T)
    params = LucjParameters(3, (LucjLayer(K, Jaa, Jaa.copy(), Jab),), np.zeros((3, 3)))
    save_parameters(params, root / "rand_params.json")
    return root
