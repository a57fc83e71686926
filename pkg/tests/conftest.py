import importlib.resources

import pytest

from semantica.knowledge import ConceptKB, load_kb


def data_path(name: str):
    return importlib.resources.files("semantica") / "data" / name


@pytest.fixture(scope="session")
def home_kb() -> ConceptKB:
    return load_kb(data_path("kb_home.json"))


@pytest.fixture(scope="session")
def demo_world():
    from semantica.demo import build_demo_world
    world, result = build_demo_world()
    return world


@pytest.fixture(scope="session")
def demo_lexicon():
    from semantica.demo import DEMO_LEXICON
    from semantica.grounding import Lexicon
    return Lexicon(DEMO_LEXICON)


@pytest.fixture()
def toy_kb() -> ConceptKB:
    """Small hand-built taxonomy used where tests need full control."""
    kb = ConceptKB()
    kb.add_concept("Room", isa="Areas")
    kb.add_concept("Kitchen", isa="Room")
    kb.add_concept("LivingRoom", isa="Room")
    kb.add_concept("Door", isa="StructuralElements",
                   properties={"height": 2.0, "width": 0.9, "length": 0.3})
    kb.add_concept("Appliance", isa="Objects")
    kb.add_concept("Fridge", isa="Appliance", default_location="Kitchen",
                   properties={"height": 1.8, "width": 0.7, "length": 0.7, "color": "white"})
    kb.add_concept("MiniFridge", isa="Fridge",
                   properties={"height": 0.85, "width": 0.5, "length": 0.5})
    kb.add_concept("Table", isa="Objects",
                   properties={"height": 0.75, "width": 1.4, "length": 0.8})
    kb.add_concept("Bathtub", isa="Objects")
    kb.validate()
    return kb
