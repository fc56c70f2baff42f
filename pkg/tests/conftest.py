import numpy as np
import pytest

from slakit import dataset, pca


@pytest.fixture(scope="session")
def toy_corpus():
    """Small separable mixture used across engine/metric tests."""
    ds = dataset.make_gaussian_mixture(400, 6, 0.25, 2.0, seed=99)
    noisy, mask = dataset.inject_noise(ds, 0.02, seed=5)
    model = pca.fit_pca(noisy.features, 6)
    x = pca.transform(model, noisy.features)
    return noisy, mask, np.ascontiguousarray(x)
