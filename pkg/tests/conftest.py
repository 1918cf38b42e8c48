import pytest

from cimsim.harness import build_demo_assets, load_dataset, load_model


@pytest.fixture(scope="session")
def demo_assets(tmp_path_factory):
    directory = tmp_path_factory.mktemp("demo")
    return build_demo_assets(str(directory))


@pytest.fixture(scope="session")
def demo_model(demo_assets):
    return load_model(demo_assets["model"])


@pytest.fixture(scope="session")
def demo_test_set(demo_assets):
    return load_dataset(demo_assets["test"])
