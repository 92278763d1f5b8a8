
import pytest

from bohmdirac import dirac, foliation

REPO_ROOT = __import__("pathlib").Path(__file__).resolve().parent.parent


def make_packet(k_center, x_center, n_modes=64, spread=1.0, mass=1.0):
    return dirac.gaussian_packet(mass, k_center, spread, n_modes, x_center=x_center)


@pytest.fixture(scope="session")
def flat_spec():
    return foliation.flat_foliation()


@pytest.fixture(scope="session")
def appendix_spec():
    return foliation.appendix_foliation()


@pytest.fixture(scope="session")
def appendix2_spec():
    return foliation.appendix_foliation2()


@pytest.fixture(scope="session")
def backward_spec():
    return foliation.backward_example()


@pytest.fixture(scope="session")
def entangled_wave():
    """Two-term entangled pair: slot 1 in the plateau region, slot 2 right of it."""
    return dirac.MultiTimeWave(
        masses=(1.0, 1.0),
        terms=(
            (0.8, (make_packet(0.6, -2.2), make_packet(-0.4, 1.5))),
            (0.55 + 0.25j, (make_packet(-0.5, -2.3), make_packet(0.7, 1.3))),
        ),
    )


@pytest.fixture(scope="session")
def product_wave():
    return dirac.MultiTimeWave.product([make_packet(0.6, -2.2),
                                        make_packet(-0.4, 1.5)])


@pytest.fixture(scope="session")
def windows2():
    return ((-14.0, 14.0), (-14.0, 14.0))
