import pathlib

import pytest

DATA = pathlib.Path(__file__).resolve().parents[2] / "data"


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def demo(data_dir):
    def load(name):
        import raider

        return raider.load_scene(data_dir / "scenes" / "demo" / name)

    return load
