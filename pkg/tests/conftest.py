import numpy as np
import pytest

from pondsense.field import LaserField

IP = 0.5  # ionization potential used throughout (a.u.)


@pytest.fixture(scope="session")
def mono_field():
    return LaserField(up=0.44, omega=0.057, cep=np.pi / 2, envelope="mono")


@pytest.fixture(scope="session")
def gauss5_field():
    w = 0.057
    return LaserField(up=0.44, omega=w, cep=np.pi / 2, envelope="gaussian",
                      tau=5 * 2 * np.pi / w)


@pytest.fixture(scope="session")
def gauss2_field():
    w = 0.057
    return LaserField(up=0.44, omega=w, cep=np.pi / 2, envelope="gaussian",
                      tau=2 * 2 * np.pi / w)
