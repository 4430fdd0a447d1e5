import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from scfuzz.dsl import parse_program  # noqa: E402
from scfuzz.lattice import default_lattice  # noqa: E402
from scfuzz.values import ValueFactory  # noqa: E402

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "scfuzz" / "fixtures"
FIXTURE_NAMES = ("power", "handcrafted", "nested", "identity")

settings.register_profile(
    "repo",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("repo")


def load_fixture(name):
    return parse_program((FIXTURES / f"{name}.nlib").read_text(encoding="utf-8"))


@pytest.fixture
def lattice():
    return default_lattice()


@pytest.fixture
def factory(lattice):
    return ValueFactory(lattice)


@pytest.fixture
def power():
    return load_fixture("power")


@pytest.fixture
def power_inputs(factory):
    """The worked example's inputs: a list and the string "abc"."""
    return [factory.from_python([1, 2, 3]), factory.from_python("abc")]
