import numpy as np
import pytest

from stabforge import AlgebraicStab, GeometricStab, ProductStab


def random_algebraic(rng, phi_range=(1.0, 3.0)) -> AlgebraicStab:
    return AlgebraicStab(
        k=int(rng.integers(-3, 4)),
        psi=float(rng.uniform(-1.5, 1.5)),
        phi=float(rng.uniform(*phi_range)),
        m0=float(rng.uniform(0.1, 10.0)),
        m1=float(rng.uniform(0.1, 10.0)),
    )


def random_geometric(rng) -> GeometricStab:
    return GeometricStab(
        tau=complex(rng.uniform(-2, 2), rng.uniform(0.2, 3.0)),
        c=complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)),
    )


@pytest.fixture(scope="session")
def pure_algebraic_tuples():
    """The 500 random admissible pure-algebraic tuples shared by criteria 2 and 6."""
    rng = np.random.default_rng(20240811)
    out = []
    for _ in range(500):
        n = int(rng.integers(1, 5))
        out.append(ProductStab(tuple(random_algebraic(rng) for _ in range(n))))
    return out


@pytest.fixture(scope="session")
def mixed_tuples():
    """The 100 random mixed tuples (one geometric factor) shared by criteria 4 and 6."""
    rng = np.random.default_rng(20240812)
    out = []
    for _ in range(100):
        n = int(rng.integers(2, 4))
        geo_at = int(rng.integers(0, n))
        factors = [
            random_geometric(rng) if i == geo_at else random_algebraic(rng)
            for i in range(n)
        ]
        out.append(ProductStab(tuple(factors)))
    return out
