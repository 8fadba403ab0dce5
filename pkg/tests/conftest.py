"""Shared pytest fixtures and configuration for cissrp tests"""

import pytest
import tempfile
import shutil
from pathlib import Path
from hypothesis import settings, Verbosity

from src.config.config_manager import RunConfig
from src.config.system_file import parse_system_file
from src.spin_core.hamiltonian import Nucleus, SpinSystemSpec

# Configure hypothesis for property-based testing
settings.register_profile("default", max_examples=20, deadline=None)
settings.register_profile("ci", max_examples=100, deadline=None)
settings.register_profile("dev", max_examples=10, deadline=None, verbosity=Verbosity.verbose)
settings.load_profile("default")


@pytest.fixture
def temp_dir():
    """Create a temporary directory for test files"""
    temp_path = tempfile.mkdtemp()
    yield Path(temp_path)
    shutil.rmtree(temp_path, ignore_errors=True)


@pytest.fixture
def temp_config_file(temp_dir):
    """Create a temporary config file path"""
    config_path = temp_dir / "config.json"
    yield config_path
    if config_path.exists():
        config_path.unlink()


@pytest.fixture(scope="session")
def toy_1n1n():
    """Bundled system with one isotropic 0.5 mT proton per radical (dimension 16)"""
    return parse_system_file("toy-1n1n")


@pytest.fixture(scope="session")
def toy_2n2n():
    """Bundled anisotropic system with two nuclei per radical (dimension 64)"""
    return parse_system_file("toy-2n2n")


@pytest.fixture
def bare_pair():
    """Radical pair without nuclei (dimension 4)"""
    return SpinSystemSpec(label="bare")


@pytest.fixture
def one_nucleus():
    """Single donor proton (dimension 8)"""
    return SpinSystemSpec(donor_nuclei=(Nucleus.isotropic(0.5),), label="one-nucleus")


@pytest.fixture
def fast_config():
    """
    Run configuration with fast reactions and a short sample grid.

    k_F = k_R = 1e7 s^-1 keeps the horizon near 1.4 us, so RK4 runs stay cheap.
    The field is tilted: along z, isotropic hyperfine alone leaves the
    reduced electron state of the chi = pi/2 start diagonal and M_L = 0.
    """
    config = RunConfig()
    config.rates.k_f = 1e7
    config.rates.k_r = 1e7
    config.magnetic_field.theta = 0.6
    config.magnetic_field.phi = 0.3
    config.integrator.sample_count = 400
    return config
